#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <utility>
#include <vector>

#include "nsr/matrix.hpp"
#include "nsr/richardson.hpp"

namespace nsr {

/// Truncated Fourier signal model: m harmonics of a fundamental at q0
/// radians per sample, estimated through the interleaved regressor
/// [cos(q0 k), sin(q0 k), ..., cos(m q0 k), sin(m q0 k)].
struct HarmonicModel {
    double q0 = 0.0;
    int m = 1;

    std::size_t dim() const { return static_cast<std::size_t>(2 * m); }
    /// q0 = 2*pi*fundamental/sample_rate; validates 0 < q0 < pi and m >= 1.
    static HarmonicModel from_rates(double fundamental_hz, double sample_rate_hz, int m);
};

/// The 2m regressor at step k (k >= 1).
DenseVector regressor(const HarmonicModel& model, long k);

/// Sliding-window normal equations: a = sum of phi phi^T and b = sum of
/// phi*y over the last s samples, maintained by rank-one update plus
/// rank-one downdate of the expiring pair. The raw (phi, y) buffer is kept
/// so tests can recompute the sums from scratch.
class WindowAccumulator {
  public:
    WindowAccumulator(HarmonicModel model, std::size_t s);

    /// Consume the next sample (the step index advances internally).
    void push(double y);

    bool full() const { return buffer_.size() == s_; }
    long step() const { return k_; }
    std::size_t window_size() const { return s_; }
    const HarmonicModel& model() const { return model_; }
    const DenseMatrix& information() const { return a_; }
    const DenseVector& moment() const { return b_; }
    const std::deque<std::pair<DenseVector, double>>& buffer() const { return buffer_; }

  private:
    HarmonicModel model_;
    std::size_t s_;
    long k_ = 0;
    DenseMatrix a_;
    DenseVector b_;
    std::deque<std::pair<DenseVector, double>> buffer_;
};

/// Simulated acquisition failure: the listed columns of the information
/// matrix and entries of the moment vector are zeroed (1-based indices).
/// rows_too extends the zeroing to the matching rows; the published failure
/// description zeroes columns only, so that is the default.
struct FaultSpec {
    std::vector<int> zero_columns;
    std::vector<int> zero_entries;
    bool rows_too = false;
    bool active = false;
};

std::pair<DenseMatrix, DenseVector> inject_fault(const DenseMatrix& a, const DenseVector& b,
                                                 const FaultSpec& fault);

/// Per-harmonic magnitudes sqrt(theta_{2i-1}^2 + theta_{2i}^2).
std::vector<double> amplitudes(const DenseVector& theta, const HarmonicModel& model);

/// One amplitude excursion on one phase: the fundamental pair is scaled by
/// factor while t_start <= t < t_end (seconds; sample k maps to
/// t = (k-1)/sample_rate). factor < 1 is a sag, > 1 a swell.
struct PhaseEvent {
    int phase = 0;  // 0 = a, 1 = b, 2 = c
    double factor = 1.0;
    double t_start = 0.0;
    double t_end = 0.0;
};

struct SignalScenario {
    double sample_rate_hz = 1920.0;
    double fundamental_hz = 60.0;
    double duration_s = 2.0;
    int harmonics = 5;
    double nominal_amplitude = 1.0;
    /// Amplitudes of harmonics 2..m; when empty a decaying default profile
    /// nominal * 0.05/(i-1) is used.
    std::vector<double> harmonic_amplitudes;
    /// Absolute noise standard deviation; defaults to 0.5% of nominal.
    std::optional<double> noise_sigma;
    std::uint64_t seed = 0;
    std::vector<PhaseEvent> events;

    HarmonicModel model() const;
    double resolved_sigma() const;
    /// Size-m amplitude list, fundamental first.
    std::vector<double> resolved_harmonics() const;
    std::size_t sample_count() const;
};

struct ThreePhaseSignal {
    std::vector<double> a, b, c;

    std::size_t samples() const { return a.size(); }
    const std::vector<double>& phase(int p) const;
};

/// Coefficient vector that generates one phase: pair i is
/// (h_i cos(i psi), -h_i sin(i psi)) with psi in {0, -2pi/3, +2pi/3} and the
/// fundamental scaled by fundamental_factor.
DenseVector true_theta(const SignalScenario& sc, int phase, double fundamental_factor = 1.0);

/// True when the event covers phase `phase` at time t.
bool event_applies(const PhaseEvent& ev, int phase, double t);

/// Noise-free sample is phi_k^T theta with the per-time event scaling; white
/// Gaussian noise (fixed seed, one generator, draws ordered a, b, c per
/// step) is added on top. Throws std::invalid_argument on malformed events.
ThreePhaseSignal generate_signal(const SignalScenario& sc);

struct TraceRecord {
    long k = 0;
    DenseVector theta;
    std::vector<double> amplitudes;
    double residual_norm = 0.0;
    bool converged = false;
};

struct DetectionTrace {
    HarmonicModel model;
    std::size_t window = 0;
    std::vector<TraceRecord> records;
    std::uint64_t total_mmm = 0;
    std::uint64_t total_mvm = 0;
    /// Steps whose solve threw DivergenceError (converged = false alone can
    /// also mean a plateau or iteration-budget stop).
    std::size_t diverged_steps = 0;
};

/// Full estimation pipeline over one sampled phase: per step with a full
/// window — snapshot (A, b), inject the fault, regularize with beta,
/// alpha-precondition, Richardson-solve warm-started from the previous
/// theta. Per-step solver divergence is recorded (converged = false) and the
/// pipeline continues.
DetectionTrace detect(const std::vector<double>& stream, const HarmonicModel& model,
                      std::size_t s, const FaultSpec& fault, double beta,
                      const RichardsonConfig& cfg);

}  // namespace nsr
