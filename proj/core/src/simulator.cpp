#include "witsopt/simulator.hpp"

#include "witsopt/costs.hpp"
#include "witsopt/errors.hpp"
#include "witsopt/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <type_traits>
#include <vector>

namespace witsopt {

namespace {

constexpr std::uint64_t kBlock = 4096;
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 output function. Output k of the stream keyed by `key` is
// mix(key + (k + 1) * golden), so any sample can be generated directly from
// its index.
constexpr std::uint64_t mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;  // [0, 1)
}

// Per-sample encoder/receiver for one affine operating point.
struct AffineLaw {
  double shrink = 0.0;    // U1 = -shrink X0 + shift
  double shift = 0.0;
  double gain = 0.0;      // estimate = gain Y1 + offset
  double offset = 0.0;

  static AffineLaw at(double power, const ModelParams& params) {
    AffineLaw law;
    const double q = params.source_var;
    if (power <= q) {
      law.shrink = std::sqrt(power / q);
    } else {
      law.shrink = 1.0;
      law.shift = std::sqrt(power - q);
    }
    const AffineReceiver rx = affine_receiver_coefficients(power, params);
    law.gain = rx.gain;
    law.offset = rx.offset;
    return law;
  }
};

struct Moments {
  double count = 0.0;
  double power_sum = 0.0;
  double power_sq = 0.0;
  double err_sum = 0.0;
  double err_sq = 0.0;

  void add(double u, double err) noexcept {
    const double pu = u * u;
    const double e = err * err;
    count += 1.0;
    power_sum += pu;
    power_sq += pu * pu;
    err_sum += e;
    err_sq += e * e;
  }
  void merge(const Moments& o) noexcept {
    count += o.count;
    power_sum += o.power_sum;
    power_sq += o.power_sq;
    err_sum += o.err_sum;
    err_sq += o.err_sq;
  }
};

// Two strata: the time-sharing schedule uses both, other strategies only the first.
using BlockMoments = std::array<Moments, 2>;

double stratum_variance(double count, double sum, double sq) {
  if (count < 2.0) return 0.0;
  const double mean = sum / count;
  return std::max(0.0, (sq - count * mean * mean) / (count - 1.0));
}

}  // namespace

std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t index) noexcept {
  const std::uint64_t key = mix(seed ^ 0x6A09E667F3BCC909ULL);
  const std::uint64_t a = mix(key + (2 * index + 1) * kGolden);
  const std::uint64_t b = mix(key + (2 * index + 2) * kGolden);
  const double u1 = 1.0 - to_unit(a);  // (0, 1]
  const double u2 = to_unit(b);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

std::string describe(const Strategy& s) {
  std::ostringstream os;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, AffineStrategy>) os << "affine(P=" << v.power << ")";
        if constexpr (std::is_same_v<T, TimeShareStrategy>) os << "timeshare(P=" << v.power << ")";
        if constexpr (std::is_same_v<T, TwoPointStrategy>) os << "twopoint(a=" << v.amplitude << ")";
      },
      s);
  return os.str();
}

AffineReceiver affine_receiver_coefficients(double power, const ModelParams& params) {
  ModelParams::make(params.source_var, params.noise_var);
  if (!(std::isfinite(power) && power >= 0.0)) {
    throw InvalidParams("affine power must be finite and >= 0");
  }
  const double q = params.source_var;
  if (power > q) return {0.0, std::sqrt(power - q)};
  const double gap = std::sqrt(q) - std::sqrt(power);
  const double var_x1 = gap * gap;
  return {var_x1 / (var_x1 + params.noise_var), 0.0};
}

std::pair<double, double> strategy_theory(const Strategy& s, const ModelParams& params) {
  return std::visit(
      [&](const auto& v) -> std::pair<double, double> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, AffineStrategy>) {
          return {v.power, best_linear_cost(v.power, params)};
        } else if constexpr (std::is_same_v<T, TimeShareStrategy>) {
          return {v.power, optimal_gaussian_cost(v.power, params)};
        } else {
          const CostPoint c = two_point_costs(v.amplitude, params);
          return {c.power, c.estimation};
        }
      },
      s);
}

SimResult simulate(const Strategy& strategy, const ModelParams& params, const SimConfig& config) {
  ModelParams::make(params.source_var, params.noise_var);
  if (config.samples < 1) throw InvalidStrategy("sample count must be >= 1");
  if (config.chunk < 1) throw InvalidStrategy("chunk size must be >= 1");

  const double q = params.source_var;
  const double n = params.noise_var;
  const double sq = std::sqrt(q);
  const double sn = std::sqrt(n);

  // Resolve the strategy into per-stratum affine laws or the two-point law.
  std::array<AffineLaw, 2> laws{};
  std::uint64_t first_stratum_len = config.samples;
  bool two_point = false;
  double amp = 0.0;

  if (const auto* a = std::get_if<AffineStrategy>(&strategy)) {
    if (!(std::isfinite(a->power) && a->power >= 0.0)) {
      throw InvalidStrategy("affine target power must be >= 0");
    }
    laws[0] = AffineLaw::at(a->power, params);
  } else if (const auto* t = std::get_if<TimeShareStrategy>(&strategy)) {
    const auto window = gaussian_thresholds(params);
    if (!window) {
      throw InvalidStrategy("time-sharing needs Q > 4N; the window [P1, P2] is empty");
    }
    double lambda = 0.0;
    try {
      lambda = time_share_weight(t->power, params);
    } catch (const OutOfWindow&) {
      std::ostringstream os;
      os.precision(9);
      os << "time-sharing power " << t->power << " outside admissible window [" << window->low
         << ", " << window->high << "]";
      throw InvalidStrategy(os.str());
    }
    laws[0] = AffineLaw::at(window->low, params);
    laws[1] = AffineLaw::at(window->high, params);
    first_stratum_len = static_cast<std::uint64_t>(
        std::ceil(lambda * static_cast<double>(config.samples)));
    first_stratum_len = std::min(first_stratum_len, config.samples);
  } else {
    const auto& tp = std::get<TwoPointStrategy>(strategy);
    if (!(std::isfinite(tp.amplitude) && tp.amplitude >= 0.0)) {
      throw InvalidStrategy("two-point amplitude must be >= 0");
    }
    two_point = true;
    amp = tp.amplitude;
  }

  const std::uint64_t total = config.samples;
  const std::uint64_t blocks = (total + kBlock - 1) / kBlock;
  const std::uint64_t blocks_per_task = std::max<std::uint64_t>(1, (config.chunk + kBlock - 1) / kBlock);
  const std::uint64_t tasks = (blocks + blocks_per_task - 1) / blocks_per_task;

  std::vector<BlockMoments> partial(blocks);

  auto run_block = [&](std::uint64_t b) {
    BlockMoments m{};
    const std::uint64_t lo = b * kBlock;
    const std::uint64_t hi = std::min(total, lo + kBlock);
    for (std::uint64_t t = lo; t < hi; ++t) {
      const auto [g0, g1] = normal_pair(config.seed, t);
      const double x0 = sq * g0;
      const double z1 = sn * g1;
      if (two_point) {
        const double sign = static_cast<double>((x0 > 0.0) - (x0 < 0.0));
        const double x1 = amp * sign;
        const double u1 = x1 - x0;
        const double y1 = x1 + z1;
        const double est = amp == 0.0 ? 0.0 : two_point_receiver(y1, amp, n);
        m[0].add(u1, x1 - est);
      } else {
        const std::size_t s = t < first_stratum_len ? 0 : 1;
        const AffineLaw& law = laws[s];
        const double u1 = -law.shrink * x0 + law.shift;
        const double x1 = x0 + u1;
        const double y1 = x1 + z1;
        const double est = law.gain * y1 + law.offset;
        m[s].add(u1, x1 - est);
      }
    }
    partial[b] = m;
  };

  parallel_for(static_cast<std::size_t>(tasks), resolve_threads(config.threads),
               [&](std::size_t task) {
                 const std::uint64_t first = task * blocks_per_task;
                 const std::uint64_t last = std::min(blocks, first + blocks_per_task);
                 for (std::uint64_t b = first; b < last; ++b) run_block(b);
               });

  BlockMoments sum{};
  for (const auto& m : partial) {
    sum[0].merge(m[0]);
    sum[1].merge(m[1]);
  }

  const double count = static_cast<double>(total);
  SimResult r;
  r.samples = total;
  r.seed = config.seed;
  r.power_hat = (sum[0].power_sum + sum[1].power_sum) / count;
  r.estimation_hat = (sum[0].err_sum + sum[1].err_sum) / count;

  // stratified standard errors: Var(mean) = sum_s n_s var_s / n^2
  double var_p = 0.0;
  double var_s = 0.0;
  for (const Moments& m : sum) {
    var_p += m.count * stratum_variance(m.count, m.power_sum, m.power_sq);
    var_s += m.count * stratum_variance(m.count, m.err_sum, m.err_sq);
  }
  r.power_se = std::sqrt(var_p) / count;
  r.estimation_se = std::sqrt(var_s) / count;
  return r;
}

}  // namespace witsopt
