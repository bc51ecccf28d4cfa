#include "tassim/timing.hpp"

#include <cmath>
#include <cstdlib>

namespace tassim {

void validate_model(const DelayModel& model) {
  switch (model.kind) {
    case DelayKind::Constant:
      break;
    case DelayKind::Uniform:
      if (model.lo > model.hi) throw TimingError("uniform delay bounds inverted");
      break;
    case DelayKind::Empirical: {
      if (model.points.empty()) throw TimingError("empirical delay model has no points");
      double sum = 0;
      for (const auto& [v, p] : model.points) {
        if (p < 0) throw TimingError("negative probability in empirical model");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw TimingError("empirical probabilities sum to " + std::to_string(sum));
      break;
    }
    case DelayKind::Scripted:
      if (model.sequence.empty()) throw TimingError("scripted delay sequence is empty");
      break;
  }
}

DelaySampler::DelaySampler(const DelayModel& model) : model_(model) {
  validate_model(model_);
  if (model_.kind == DelayKind::Empirical) {
    // Resolve probabilities to integer weights so draws stay exact.
    for (const auto& [value, prob] : model_.points) {
      const auto weight = static_cast<std::uint64_t>(std::llround(prob * 1e12));
      if (weight > 0) table_.add(value, weight);
    }
    if (table_.empty()) throw TimingError("empirical model has no positive-probability point");
  }
}

Ns DelaySampler::sample(Rng& rng) {
  switch (model_.kind) {
    case DelayKind::Constant:
      return model_.constant;
    case DelayKind::Uniform:
      return rng.range(model_.lo, model_.hi);
    case DelayKind::Empirical:
      return table_.sample(rng);
    case DelayKind::Scripted: {
      const Ns v = model_.sequence[cursor_];
      cursor_ = (cursor_ + 1) % model_.sequence.size();
      return v;
    }
  }
  return 0;
}

Ns sample_delay(const DelayModel& model, Rng& rng) {
  DelaySampler sampler(model);
  return sampler.sample(rng);
}

Ns relative_timestamp(Timestamp t_abs, const PeriodReference& ref) {
  if (t_abs < ref.last_completion)
    throw TimingError("clock regression: timestamp precedes the period reference");
  return static_cast<Ns>(t_abs - ref.last_completion);
}

Ns delta_tg(Timestamp t_next, Timestamp t_prev, Ns period_ns) {
  if (t_next <= t_prev) throw TimingError("completion timestamps not increasing");
  return static_cast<Ns>(t_next - t_prev) - period_ns;
}

Ns internal_delay_total(Ns d_tg, Ns d_queue, Ns d_control) {
  return d_tg + d_queue + d_control;
}

Ns predicted_entry_duration(Ns configured_ns, Ns delta_prev, Ns delta_cur) {
  return configured_ns + std::abs(delta_prev) + delta_cur;
}

namespace {

DelayModel weighted(std::vector<std::pair<Ns, std::uint64_t>> weights) {
  std::uint64_t total = 0;
  for (const auto& [v, w] : weights) total += w;
  std::vector<std::pair<Ns, double>> points;
  points.reserve(weights.size());
  for (const auto& [v, w] : weights)
    points.emplace_back(v, static_cast<double>(w) / static_cast<double>(total));
  return DelayModel::make_empirical(std::move(points));
}

}  // namespace

DelayModel default_tg_model() {
  // Period jitter: mostly within +/-1 ns, bounded at +/-2 ns.
  return weighted({{-2, 50}, {-1, 150}, {0, 600}, {1, 150}, {2, 50}});
}

DelayModel default_queue_model() {
  // Two bands: {6..11} at weight 3353 each and {26..32} at 1226 each.
  // Mean is (51*3353 + 203*1226) / 28700 = 14.63 ns exactly; 70.1% of the
  // mass sits below 11 ns and the support stays inside the measured 1..63 ns.
  std::vector<std::pair<Ns, std::uint64_t>> w;
  for (Ns v = 6; v <= 11; ++v) w.emplace_back(v, 3353);
  for (Ns v = 26; v <= 32; ++v) w.emplace_back(v, 1226);
  return weighted(std::move(w));
}

DelayModel default_control_model() {
  // Generation gaps: median 9 ns with a short tail to 12 ns.
  return weighted({{9, 960}, {10, 20}, {11, 12}, {12, 8}});
}

}  // namespace tassim
