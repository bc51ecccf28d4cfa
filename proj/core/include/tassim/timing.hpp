#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "tassim/rng.hpp"
#include "tassim/types.hpp"

namespace tassim {

struct TimingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Timestamp of the last completed GCL period. Updated only when a
/// period-completion frame is processed.
struct PeriodReference {
  Timestamp last_completion = 0;
  Ns period_ns = 0;
};

enum class DelayKind { Constant, Uniform, Empirical, Scripted };

/// Injectable delay distribution. Values are integer nanoseconds; the
/// generator deviation may be negative, queue and control delays may not.
struct DelayModel {
  DelayKind kind = DelayKind::Constant;
  Ns constant = 0;
  Ns lo = 0, hi = 0;                           // Uniform, inclusive
  std::vector<std::pair<Ns, double>> points;   // Empirical: (value, probability)
  std::vector<Ns> sequence;                    // Scripted, consumed cyclically

  static DelayModel make_constant(Ns c) { return {DelayKind::Constant, c, 0, 0, {}, {}}; }
  static DelayModel make_uniform(Ns lo, Ns hi) { return {DelayKind::Uniform, 0, lo, hi, {}, {}}; }
  static DelayModel make_empirical(std::vector<std::pair<Ns, double>> pts) {
    return {DelayKind::Empirical, 0, 0, 0, std::move(pts), {}};
  }
  static DelayModel make_scripted(std::vector<Ns> seq) {
    return {DelayKind::Scripted, 0, 0, 0, {}, std::move(seq)};
  }
};

/// Throws TimingError if the model is malformed (empirical probabilities not
/// summing to 1 within 1e-9, empty scripted sequence, inverted uniform bounds).
void validate_model(const DelayModel& model);

/// Stateful sampler: owns the scripted cursor and the integer-weight table an
/// empirical model is resolved to. Sampling is deterministic given the Rng.
class DelaySampler {
 public:
  DelaySampler() = default;
  explicit DelaySampler(const DelayModel& model);

  Ns sample(Rng& rng);
  const DelayModel& model() const { return model_; }

 private:
  DelayModel model_;
  WeightedTable table_;    // empirical
  std::size_t cursor_ = 0; // scripted
};

/// Single-shot convenience over DelaySampler (scripted models restart at the
/// head each call, so use DelaySampler where the cursor matters).
Ns sample_delay(const DelayModel& model, Rng& rng);

/// t_abs - last completion; clamping to the schedule happens downstream in
/// entry_at, not here. Throws on clock regression.
Ns relative_timestamp(Timestamp t_abs, const PeriodReference& ref);

/// Deviation of a completion gap from the configured period.
Ns delta_tg(Timestamp t_next, Timestamp t_prev, Ns period_ns);

/// Sum of the three per-transition delay components.
Ns internal_delay_total(Ns d_tg, Ns d_queue, Ns d_control);

/// Actual duration of an entry whose predecessor was cut short by delta_prev
/// (<= 0 in that scenario) and whose own boundary slipped by delta_cur.
Ns predicted_entry_duration(Ns configured_ns, Ns delta_prev, Ns delta_cur);

// Default shapes fitted to the measured statistics: queue delay has mean
// 14.63 ns exactly with most mass below 11 ns, control gaps have median 9 ns
// and maximum 12 ns, generator deviation is centered with small spread.
DelayModel default_tg_model();
DelayModel default_queue_model();
DelayModel default_control_model();

}  // namespace tassim
