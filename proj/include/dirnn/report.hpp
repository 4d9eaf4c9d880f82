#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "dirnn/harness.hpp"
#include "dirnn/idx.hpp"

namespace dirnn {

// "%.9g" everywhere a double reaches a CSV cell, so reports are byte-stable.
inline std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline void write_adaptive_csv(const AdaptiveResult& r, std::ostream& out) {
  out << "input_id,iteration,metric,scope,selected_transform_kind,delta_l2,correct_bit,"
         "pseudo_mode_flag\n";
  const char* metric = to_string(r.config.metric);
  const char* scope = to_string(r.config.scope);
  const int pseudo = r.config.metamorphic ? 1 : 0;
  for (const SelectionRecord& row : r.selections) {
    out << row.input_id << ',' << row.iteration << ',' << metric << ',' << scope << ','
        << row.transform << ',' << fmt_g(row.delta_l2) << ',' << row.correct << ',' << pseudo
        << '\n';
  }
}

inline void write_adaptive_csv(const AdaptiveResult& r, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path);
  write_adaptive_csv(r, out);
}

inline nlohmann::json config_json(const HarnessConfig& cfg) {
  return nlohmann::json{
      {"metric", to_string(cfg.metric)},
      {"scope", to_string(cfg.scope)},
      {"iterations", cfg.iterations},
      {"metamorphic", cfg.metamorphic},
      {"seed", cfg.seed},
      {"nc_k", cfg.nc_k},
      {"workers", cfg.workers},
      {"sd",
       {{"eps2", cfg.sd.eps2}, {"eps_inf", cfg.sd.eps_inf},
        {"samples_per_norm", cfg.sd.samples_per_norm}}},
      {"natural",
       {{"shift_step", cfg.natural.shift_step},
        {"zoom_step", cfg.natural.zoom_step},
        {"brightness_step", cfg.natural.brightness_step},
        {"rotation_step", cfg.natural.rotation_step},
        {"shear_step", cfg.natural.shear_step},
        {"blur_sigma", {cfg.natural.blur_sigma_lo, cfg.natural.blur_sigma_hi}},
        {"contrast_step", cfg.natural.contrast_step},
        {"variants_per_kind", cfg.natural.variants_per_kind}}},
  };
}

inline nlohmann::json iteration_json(const IterationRecord& rec) {
  return nlohmann::json{{"iter", rec.iteration},
                        {"accuracy_mean", rec.accuracy.mean},
                        {"accuracy_ci", rec.accuracy.half_width},
                        {"n", rec.accuracy.n},
                        {"mean_delta_l2", rec.mean_delta_l2}};
}

inline nlohmann::json adaptive_summary_json(const AdaptiveResult& r) {
  nlohmann::json per_iter = nlohmann::json::array();
  for (const IterationRecord& rec : r.iterations) per_iter.push_back(iteration_json(rec));
  return nlohmann::json{
      {"config", config_json(r.config)},
      {"seeds",
       {{"total", r.input_ids.size() + r.excluded_ids.size()},
        {"included", r.input_ids.size()},
        {"excluded_ids", r.excluded_ids}}},
      {"clean", iteration_json(r.clean)},
      {"per_iteration", per_iter},
      {"rbo_tables", nullptr},
      {"rbo_persistence_p", nullptr},
  };
}

inline nlohmann::json rq1_json(const Rq1Result& r) {
  nlohmann::json table = nlohmann::json::object();
  for (const Rq1Cell& cell : r.table) {
    const std::string key = std::string(to_string(cell.a)) + "|" + to_string(cell.b);
    table[key] = {{"mean", cell.stat.mean}, {"ci", cell.stat.half_width}, {"n", cell.stat.n}};
  }
  return nlohmann::json{
      {"config", config_json(r.config)},
      {"per_iteration", nullptr},
      {"rbo_tables", {{to_string(r.config.scope), table}}},
      {"rbo_persistence_p", r.p_used},
      {"candidate_norm",
       {{"mean", r.candidate_norm.mean},
        {"ci", r.candidate_norm.half_width},
        {"n", r.candidate_norm.n}}},
  };
}

inline void write_rbo_bench_csv(const std::vector<RboBenchRow>& rows, std::ostream& out) {
  out << "length,scenario,mean,ci,p_used\n";
  for (const RboBenchRow& row : rows) {
    out << row.length << ',' << row.scenario << ',' << fmt_g(row.stat.mean) << ','
        << fmt_g(row.stat.half_width) << ',' << fmt_g(row.p_used) << '\n';
  }
}

inline nlohmann::json rbo_bench_json(const std::vector<RboBenchRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const RboBenchRow& row : rows) {
    arr.push_back({{"length", row.length},
                   {"scenario", row.scenario},
                   {"mean", row.stat.mean},
                   {"ci", row.stat.half_width},
                   {"n", row.stat.n},
                   {"p_used", row.p_used}});
  }
  return nlohmann::json{{"rows", arr}};
}

inline void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace dirnn
