#include "mubinn/synthetic_task.h"

#include <string>

namespace mubinn {

void SignMeanTask::validate() const {
  if (timesteps == 0 || features == 0) {
    throw std::invalid_argument("task needs positive timesteps and features");
  }
  if (!(margin > 0.0)) throw std::invalid_argument("task margin must be > 0");
  if (!(noise >= 0.0)) throw std::invalid_argument("task noise must be >= 0");
}

Dataset gen_dataset(const SignMeanTask& task) {
  task.validate();
  SeededRng rng(task.seed);
  Dataset d;
  d.timesteps = task.timesteps;
  d.features = task.features;
  d.samples.reserve(task.samples);
  for (std::size_t k = 0; k < task.samples; ++k) {
    Sample s;
    s.label = k % 2;
    const double mean = s.label == 1 ? task.margin : -task.margin;
    s.seq.assign(task.timesteps, RealVector(task.features));
    for (RealVector& x : s.seq) {
      for (double& v : x.span()) {
        v = task.noise > 0.0 ? rng.gaussian(mean, task.noise) : mean;
      }
    }
    d.samples.push_back(std::move(s));
  }
  return d;
}

FpModel build_integrator_model(std::size_t features, std::size_t hidden) {
  if (features == 0 || hidden == 0) {
    throw std::invalid_argument("integrator model needs positive sizes");
  }
  constexpr double kGain = 0.1;
  constexpr double kSaturate = 10.0;
  FpModel m;
  m.lstm = LSTMWeights::zeros(features, hidden);
  for (std::size_t j = 0; j < hidden; ++j) {
    m.lstm.b[gate_index(Gate::kForget)][j] = kSaturate;
    m.lstm.b[gate_index(Gate::kInput)][j] = kSaturate;
    m.lstm.b[gate_index(Gate::kOutput)][j] = kSaturate;
    for (std::size_t c = 0; c < features; ++c) {
      m.lstm.wx[gate_index(Gate::kCell)].at(j, c) =
          kGain / static_cast<double>(features);
    }
  }
  m.head.w = RealMatrix(2, hidden);
  for (std::size_t j = 0; j < hidden; ++j) {
    m.head.w.at(0, j) = -1.0;
    m.head.w.at(1, j) = 1.0;
  }
  m.head.b = RealVector(2);
  return m;
}

FpModel build_random_model(SeededRng& rng, std::size_t input,
                           std::size_t hidden, std::size_t classes,
                           double scale) {
  FpModel m;
  m.lstm = LSTMWeights::random(rng, input, hidden, scale);
  m.head.w = rng_uniform_matrix(rng, -scale, scale, classes, hidden);
  m.head.b = rng_uniform(rng, -scale, scale, classes);
  return m;
}

void check_compatible(std::size_t model_input, const Dataset& data) {
  if (data.features != model_input) {
    throw std::invalid_argument("dataset has " + std::to_string(data.features) +
                                " features per step, model expects " +
                                std::to_string(model_input));
  }
}

}  // namespace mubinn
