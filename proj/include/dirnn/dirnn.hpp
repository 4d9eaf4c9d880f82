#pragma once

// Umbrella header; individual headers are fine too.

#include "dirnn/dataset.hpp"
#include "dirnn/gradient.hpp"
#include "dirnn/harness.hpp"
#include "dirnn/idx.hpp"
#include "dirnn/layers.hpp"
#include "dirnn/metrics.hpp"
#include "dirnn/model_io.hpp"
#include "dirnn/network.hpp"
#include "dirnn/presets.hpp"
#include "dirnn/ranking.hpp"
#include "dirnn/report.hpp"
#include "dirnn/rng.hpp"
#include "dirnn/synth.hpp"
#include "dirnn/tensor.hpp"
#include "dirnn/train.hpp"
#include "dirnn/transforms.hpp"
