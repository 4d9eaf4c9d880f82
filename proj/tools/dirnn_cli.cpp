// Command-line surface: train models, run directed test loops, and benchmark
// the ranking-agreement machinery. Exit codes: 0 ok, 2 bad configuration,
// 1 runtime failure.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dirnn/dirnn.hpp"

namespace {

// Flat key=value experiment manifests: `--config FILE` after a subcommand
// expands each `key=value` line into `--key=value`, appended after the
// explicit arguments so that command-line flags win. Blank lines and lines
// starting with '#' or ';' are skipped.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw dirnn::config_error("--config needs a file path");
      path = args[i + 1];
      args.erase(args.begin() + long(i), args.begin() + long(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + long(i));
      break;
    }
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw dirnn::config_error("config file: cannot open " + path);

  std::vector<std::string> given;
  for (const std::string& tok : args)
    if (tok.rfind("--", 0) == 0) given.push_back(tok.substr(0, tok.find('=')));

  auto trim = [](std::string s) {
    const char* ws = " \t\r";
    const auto a = s.find_first_not_of(ws);
    if (a == std::string::npos) return std::string();
    return s.substr(a, s.find_last_not_of(ws) - a + 1);
  };

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0)
      throw dirnn::config_error("config file: line " + std::to_string(lineno) +
                                " is not key=value");
    const std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (val.size() >= 2 && ((val.front() == '"' && val.back() == '"') ||
                            (val.front() == '\'' && val.back() == '\'')))
      val = val.substr(1, val.size() - 2);
    const std::string flag = "--" + key;
    if (std::find(given.begin(), given.end(), flag) != given.end()) continue;
    args.push_back(flag + "=" + val);
  }
  return args;
}

struct DataOpts {
  std::string images;
  std::string labels;
  int synth = 0;
  std::uint64_t synth_seed = 7;
  int limit = 0;
};

void add_data_opts(CLI::App* sub, DataOpts& d) {
  sub->add_option("--images", d.images, "IDX image file");
  sub->add_option("--labels", d.labels, "IDX label file");
  sub->add_option("--synth", d.synth, "generate N synthetic digits instead of loading IDX");
  sub->add_option("--synth-seed", d.synth_seed, "seed for --synth");
  sub->add_option("--limit", d.limit, "use only the first N inputs");
}

dirnn::Dataset load_data(const DataOpts& d) {
  dirnn::Dataset ds;
  if (d.synth > 0) {
    ds = dirnn::make_synth_digits(d.synth, d.synth_seed);
  } else if (!d.images.empty() && !d.labels.empty()) {
    ds = dirnn::load_idx_dataset(d.images, d.labels);
  } else {
    throw dirnn::config_error("need --images and --labels, or --synth N");
  }
  if (d.limit > 0 && std::size_t(d.limit) < ds.size()) ds = ds.subset(0, std::size_t(d.limit));
  return ds;
}

struct TestOpts {
  std::string model;
  DataOpts data;
  std::string metric = "BL";
  std::string scope = "sd";
  int iterations = 5;
  std::uint64_t seed = 0;
  float eps2 = dirnn::SdSpec{}.eps2;
  float eps_inf = dirnn::SdSpec{}.eps_inf;
  int sd_samples = dirnn::SdSpec{}.samples_per_norm;
  float natural_scale = 1.0f;
  int variants = dirnn::NaturalSpec{}.variants_per_kind;
  int nc_k = 100;
  std::string profile_images;
  int workers = 1;
  std::string csv;
  std::string json;
};

void add_test_opts(CLI::App* sub, TestOpts& o) {
  sub->add_option("--model", o.model, "model file")->required();
  add_data_opts(sub, o.data);
  sub->add_option("--metric", o.metric, "FM,FL,BM,BL,MM,ML,NC,BD,BDF");
  sub->add_option("--scope", o.scope, "sd, natural, or mixed");
  sub->add_option("--iterations", o.iterations, "adaptive iterations");
  sub->add_option("--seed", o.seed, "experiment seed");
  sub->add_option("--eps2", o.eps2, "l2 radius");
  sub->add_option("--eps-inf", o.eps_inf, "linf radius");
  sub->add_option("--sd-samples", o.sd_samples, "sampled SDs per norm per iteration");
  sub->add_option("--natural-scale", o.natural_scale, "scale factor on natural magnitudes");
  sub->add_option("--variants", o.variants, "natural variants per family");
  sub->add_option("--nc-k", o.nc_k, "NC sections per neuron");
  sub->add_option("--profile-images", o.profile_images,
                  "IDX images for the NC profile (default: the seed images)");
  sub->add_option("--workers", o.workers, "worker threads");
  sub->add_option("--csv", o.csv, "per-input CSV output path");
  sub->add_option("--json", o.json, "summary JSON output path");
  sub->add_option("--config", "flat key=value file mirroring these flags; flags win");
}

dirnn::HarnessConfig harness_config(const TestOpts& o) {
  dirnn::HarnessConfig cfg;
  cfg.metric = dirnn::parse_metric(o.metric);
  cfg.scope = dirnn::parse_scope(o.scope);
  cfg.iterations = o.iterations;
  cfg.seed = o.seed;
  cfg.sd.eps2 = o.eps2;
  cfg.sd.eps_inf = o.eps_inf;
  cfg.sd.samples_per_norm = o.sd_samples;
  cfg.natural = dirnn::NaturalSpec{}.scaled(o.natural_scale);
  cfg.natural.variants_per_kind = o.variants;
  cfg.nc_k = o.nc_k;
  cfg.workers = o.workers;
  return cfg;
}

int run_test(const TestOpts& o, bool metamorphic) {
  auto [net, meta] = dirnn::load_model(o.model);
  (void)meta;
  dirnn::Dataset seeds = load_data(o.data);
  dirnn::HarnessConfig cfg = harness_config(o);
  cfg.metamorphic = metamorphic;

  dirnn::NcProfile profile;
  const dirnn::NcProfile* profile_ptr = nullptr;
  if (cfg.metric == dirnn::MetricKind::NC) {
    std::vector<dirnn::Tensor> imgs =
        o.profile_images.empty() ? seeds.images
                                 : dirnn::read_idx_images(o.profile_images);
    profile = dirnn::build_nc_profile(net, imgs, dirnn::middle_layer(net), cfg.nc_k);
    profile_ptr = &profile;
  }

  dirnn::AdaptiveResult result = dirnn::adaptive_test(net, seeds, cfg, profile_ptr);
  if (!o.csv.empty()) dirnn::write_adaptive_csv(result, o.csv);
  if (!o.json.empty()) dirnn::write_json(dirnn::adaptive_summary_json(result), o.json);

  std::printf("seeds: %zu included, %zu excluded\n", result.input_ids.size(),
              result.excluded_ids.size());
  std::printf("iter %2d  %s %.4f +/- %.4f  mean|dx| %.4f\n", 0,
              metamorphic ? "pseudo-acc" : "accuracy  ", result.clean.accuracy.mean,
              result.clean.accuracy.half_width, result.clean.mean_delta_l2);
  for (const dirnn::IterationRecord& rec : result.iterations)
    std::printf("iter %2d  %s %.4f +/- %.4f  mean|dx| %.4f\n", rec.iteration,
                metamorphic ? "pseudo-acc" : "accuracy  ", rec.accuracy.mean,
                rec.accuracy.half_width, rec.mean_delta_l2);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"directed testing of feed-forward classifiers"};
  app.require_subcommand(1);

  // ---- train ----
  struct {
    std::string arch = "lenet1";
    std::string out;
    DataOpts data;
    DataOpts test;
    dirnn::TrainConfig cfg;
  } tr;
  CLI::App* train = app.add_subcommand("train", "train a preset architecture");
  train->add_option("--arch", tr.arch, "lenet1, lenet5, or mlp");
  train->add_option("--out", tr.out, "model output path")->required();
  add_data_opts(train, tr.data);
  train->add_option("--test-images", tr.test.images, "IDX test images");
  train->add_option("--test-labels", tr.test.labels, "IDX test labels");
  train->add_option("--synth-test", tr.test.synth, "generate N synthetic test digits");
  train->add_option("--epochs", tr.cfg.epochs, "training epochs");
  train->add_option("--batch", tr.cfg.batch_size, "batch size");
  train->add_option("--lr", tr.cfg.lr, "learning rate");
  train->add_option("--momentum", tr.cfg.momentum, "SGD momentum");
  train->add_option("--weight-decay", tr.cfg.weight_decay, "L2 penalty");
  train->add_option("--seed", tr.cfg.seed, "init/shuffle seed");
  train->add_option("--log-every", tr.cfg.log_every, "epoch progress stride (0 = silent)");
  train->add_option("--config", "flat key=value file mirroring these flags; flags win");

  // ---- adaptive-test / metamorphic-test ----
  TestOpts at;
  CLI::App* adaptive = app.add_subcommand("adaptive-test", "greedy directed testing loop");
  add_test_opts(adaptive, at);
  TestOpts mt;
  CLI::App* metamorphic =
      app.add_subcommand("metamorphic-test", "adaptive loop against pseudo labels");
  add_test_opts(metamorphic, mt);

  // ---- rq1-rbo ----
  struct {
    TestOpts test;
    std::string pairs;
    double p = dirnn::kRboPersistence;
  } rq;
  CLI::App* rq1 = app.add_subcommand("rq1-rbo", "rank one candidate pool under every metric");
  add_test_opts(rq1, rq.test);
  rq.test.sd_samples = 14;
  rq1->add_option("--pairs", rq.pairs, "metric pairs to print, e.g. FM:BM,FL:NC (default all)");
  rq1->add_option("--p", rq.p, "rbo persistence");

  // ---- bench-rbo ----
  struct {
    std::vector<int> lengths{28, 56};
    int trials = 10000;
    std::uint64_t seed = 7;
    double p = dirnn::kRboPersistence;
    bool calibrate = false;
    std::string csv;
    std::string json;
  } br;
  CLI::App* bench = app.add_subcommand("bench-rbo", "three-scenario rbo benchmark");
  bench->add_option("--lengths", br.lengths, "ranking lengths")->delimiter(',');
  bench->add_option("--trials", br.trials, "Monte Carlo trials");
  bench->add_option("--seed", br.seed, "benchmark seed");
  bench->add_option("--p", br.p, "rbo persistence");
  bench->add_flag("--calibrate", br.calibrate, "print the persistence-grid residual table");
  bench->add_option("--csv", br.csv, "CSV output path");
  bench->add_option("--json", br.json, "JSON output path");
  bench->add_option("--config", "flat key=value file mirroring these flags; flags win");

  // ---- project ----
  struct {
    std::string model;
    DataOpts data;
    int index = 0;
    std::string norm = "l2";
    float eps = -1.0f;
    std::string head = "loss";
  } pj;
  CLI::App* project = app.add_subcommand("project", "analytic gradient projection for one input");
  project->add_option("--model", pj.model, "model file")->required();
  add_data_opts(project, pj.data);
  project->add_option("--index", pj.index, "input index");
  project->add_option("--norm", pj.norm, "l2 or linf");
  project->add_option("--eps", pj.eps, "radius (default: 0.32 l2 / 0.06 linf)");
  project->add_option("--head", pj.head, "loss or margin");

  // ---- synth-data ----
  struct {
    int count = 1000;
    std::uint64_t seed = 7;
    std::string images;
    std::string labels;
  } sy;
  CLI::App* synth = app.add_subcommand("synth-data", "write synthetic digits as IDX files");
  synth->add_option("--count", sy.count, "number of images");
  synth->add_option("--seed", sy.seed, "generator seed");
  synth->add_option("--images", sy.images, "IDX images output path")->required();
  synth->add_option("--labels", sy.labels, "IDX labels output path")->required();

  try {
    std::vector<std::string> args = expand_config({argv + 1, argv + argc});
    std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const dirnn::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }

  try {
    if (train->parsed()) {
      dirnn::Dataset data = load_data(tr.data);
      dirnn::Network net = dirnn::make_preset(tr.arch);
      dirnn::Rng rng = dirnn::make_rng(tr.cfg.seed);
      dirnn::kaiming_init(net, rng);
      dirnn::train_sgd(net, data, tr.cfg);
      float acc = 0.0f;
      if (tr.test.synth > 0 || !tr.test.images.empty()) {
        tr.test.synth_seed = tr.data.synth_seed + 1;
        acc = float(dirnn::evaluate_accuracy(net, load_data(tr.test)));
        std::printf("test accuracy %.4f\n", acc);
      }
      dirnn::ModelMeta meta;
      meta.seed = tr.cfg.seed;
      meta.epochs = std::uint32_t(tr.cfg.epochs);
      meta.final_accuracy = acc;
      dirnn::save_model(net, meta, tr.out);
      std::printf("saved %s (%zu parameters)\n", tr.out.c_str(), net.param_count());
    } else if (adaptive->parsed()) {
      return run_test(at, false);
    } else if (metamorphic->parsed()) {
      return run_test(mt, true);
    } else if (rq1->parsed()) {
      auto [net, meta] = dirnn::load_model(rq.test.model);
      (void)meta;
      dirnn::Dataset seeds = load_data(rq.test.data);
      dirnn::HarnessConfig cfg = harness_config(rq.test);
      std::vector<dirnn::Tensor> imgs = rq.test.profile_images.empty()
                                            ? seeds.images
                                            : dirnn::read_idx_images(rq.test.profile_images);
      dirnn::NcProfile profile =
          dirnn::build_nc_profile(net, imgs, dirnn::middle_layer(net), cfg.nc_k);
      dirnn::Rq1Result result = dirnn::rq1_correlation(net, seeds, cfg, profile, rq.p);
      if (!rq.test.json.empty()) dirnn::write_json(dirnn::rq1_json(result), rq.test.json);

      std::vector<const dirnn::Rq1Cell*> cells;
      if (rq.pairs.empty()) {
        for (const dirnn::Rq1Cell& cell : result.table) cells.push_back(&cell);
      } else {
        std::stringstream ss(rq.pairs);
        std::string item;
        while (std::getline(ss, item, ',')) {
          const auto colon = item.find(':');
          if (colon == std::string::npos)
            throw dirnn::config_error("--pairs entries look like FM:BM");
          cells.push_back(&dirnn::rq1_lookup(result, dirnn::parse_metric(item.substr(0, colon)),
                                             dirnn::parse_metric(item.substr(colon + 1))));
        }
      }
      std::printf("rbo persistence p = %g over %zu inputs, mean |dx| %.4f\n", result.p_used,
                  seeds.size(), result.candidate_norm.mean);
      for (const dirnn::Rq1Cell* cell : cells)
        std::printf("%-3s vs %-3s  rbo %.3f +/- %.3f\n", dirnn::to_string(cell->a),
                    dirnn::to_string(cell->b), cell->stat.mean, cell->stat.half_width);
    } else if (bench->parsed()) {
      if (br.calibrate) {
        dirnn::RboCalibration cal = dirnn::calibrate_rbo(br.trials, br.seed);
        for (const dirnn::RboCalibrationRow& row : cal.table)
          std::printf("p %-7g max residual %.4f\n", row.p, row.max_abs_residual);
        std::printf("chosen p = %g\n", cal.p_best);
      }
      std::vector<dirnn::RboBenchRow> rows = dirnn::bench_rbo(br.lengths, br.trials, br.seed, br.p);
      for (const dirnn::RboBenchRow& row : rows)
        std::printf("L=%-3d %-9s %.3f +/- %.3f\n", row.length, row.scenario.c_str(), row.stat.mean,
                    row.stat.half_width);
      if (!br.csv.empty()) {
        std::ofstream out(br.csv, std::ios::binary);
        if (!out) throw dirnn::io_error("cannot open for writing: " + br.csv);
        dirnn::write_rbo_bench_csv(rows, out);
      }
      if (!br.json.empty()) dirnn::write_json(dirnn::rbo_bench_json(rows), br.json);
    } else if (project->parsed()) {
      auto [net, meta] = dirnn::load_model(pj.model);
      (void)meta;
      dirnn::Dataset data = load_data(pj.data);
      if (pj.index < 0 || std::size_t(pj.index) >= data.size())
        throw dirnn::config_error("--index out of range");
      const dirnn::Norm norm = pj.norm == "l2"    ? dirnn::Norm::l2
                               : pj.norm == "linf" ? dirnn::Norm::linf
                                                   : throw dirnn::config_error(
                                                         "unknown norm '" + pj.norm +
                                                         "' (valid: l2,linf)");
      const float eps = pj.eps > 0.0f ? pj.eps
                        : norm == dirnn::Norm::l2 ? dirnn::SdSpec{}.eps2
                                                  : dirnn::SdSpec{}.eps_inf;
      const dirnn::Tensor& x = data.images[std::size_t(pj.index)];
      const int label = data.labels[std::size_t(pj.index)];
      dirnn::SeedScorer scorer(net, x, label);
      const bool loss_head = pj.head == "loss";
      if (!loss_head && pj.head != "margin")
        throw dirnn::config_error("unknown head '" + pj.head + "' (valid: loss,margin)");
      dirnn::Transformation t = scorer.analytic_best_sd(norm, eps, loss_head);
      const dirnn::Tensor moved = dirnn::apply(t, x);
      const dirnn::Tensor realized = dirnn::sub(moved, x);
      nlohmann::json j{
          {"index", pj.index},
          {"label", label},
          {"norm", pj.norm},
          {"eps", eps},
          {"head", pj.head},
          {"transform", t.describe()},
          {"degenerate", t.degenerate},
          {"score", loss_head ? scorer.backward_loss(realized) : scorer.backward_margin(realized)},
          {"delta_l2", dirnn::l2_norm(realized)},
          {"delta_linf", dirnn::linf_norm(realized)},
      };
      std::cout << j.dump(2) << '\n';
    } else if (synth->parsed()) {
      dirnn::Dataset ds = dirnn::make_synth_digits(sy.count, sy.seed);
      dirnn::write_idx_images(sy.images, ds.images);
      dirnn::write_idx_labels(sy.labels, ds.labels);
      std::printf("wrote %zu images to %s / %s\n", ds.size(), sy.images.c_str(),
                  sy.labels.c_str());
    }
  } catch (const dirnn::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const dirnn::dimension_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
