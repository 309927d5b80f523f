#include "graphturing/graphon.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace graphturing {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kValidationGrid = 1024;
constexpr double kRangeSlack = 1e-12;

void require_probability(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
  }
}

double cosine_series(const std::vector<double>& c, double d) {
  double value = c.empty() ? 0.0 : c[0];
  for (std::size_t k = 1; k < c.size(); ++k) {
    value += 2.0 * c[k] * std::cos(kTwoPi * static_cast<double>(k) * d);
  }
  return value;
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

GraphonModel GraphonModel::fourier_ring(std::vector<double> coeffs) {
  if (coeffs.empty()) {
    throw std::invalid_argument("FourierRing needs at least c_0");
  }
  for (int i = 0; i < kValidationGrid; ++i) {
    const double d = static_cast<double>(i) / kValidationGrid;
    const double v = cosine_series(coeffs, d);
    if (v < -kRangeSlack || v > 1.0 + kRangeSlack) {
      std::ostringstream msg;
      msg << "FourierRing kernel leaves [0, 1] at d = " << d << " (value " << v << ")";
      throw std::invalid_argument(msg.str());
    }
  }
  return GraphonModel(FourierRing{std::move(coeffs)});
}

GraphonModel GraphonModel::small_world(double p, double q, double alpha) {
  require_probability(p, "SmallWorld p");
  require_probability(q, "SmallWorld q");
  if (!(alpha > 0.0 && alpha <= 0.5)) {
    throw std::invalid_argument("SmallWorld alpha must lie in (0, 1/2]");
  }
  return GraphonModel(SmallWorld{p, q, alpha});
}

GraphonModel GraphonModel::erdos_renyi(double p) {
  require_probability(p, "ErdosRenyi p");
  return GraphonModel(ErdosRenyi{p});
}

GraphonModel GraphonModel::bipartite(double p, double alpha) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw std::invalid_argument("Bipartite p must lie in (0, 1]");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("Bipartite alpha must lie in (0, 1)");
  }
  return GraphonModel(Bipartite{p, alpha});
}

GraphonModel GraphonModel::resonance_example() {
  return fourier_ring({0.5, 0.125, 0.125});
}

std::string GraphonModel::name() const {
  return std::visit(overloaded{
                        [](const FourierRing&) { return std::string("fourier_ring"); },
                        [](const SmallWorld&) { return std::string("small_world"); },
                        [](const ErdosRenyi&) { return std::string("erdos_renyi"); },
                        [](const Bipartite&) { return std::string("bipartite"); },
                    },
                    variant_);
}

double ring_distance(double d) {
  double a = std::fabs(std::fmod(d, 1.0));
  return std::min(a, 1.0 - a);
}

double ring_profile(const GraphonModel& model, double d) {
  return std::visit(
      overloaded{
          [&](const FourierRing& m) {
            return std::clamp(cosine_series(m.coeffs, d), 0.0, 1.0);
          },
          [&](const SmallWorld& m) { return ring_distance(d) <= m.alpha ? m.p : m.q; },
          [&](const ErdosRenyi& m) { return m.p; },
          [&](const Bipartite&) -> double {
            throw std::invalid_argument("bipartite graphon is not a ring graphon");
          },
      },
      model.variant());
}

double evaluate(const GraphonModel& model, double x, double y) {
  if (const auto* bp = std::get_if<Bipartite>(&model.variant())) {
    const double lo = std::min(x, y);
    const double hi = std::max(x, y);
    return (lo <= bp->alpha && hi > bp->alpha) ? bp->p : 0.0;
  }
  return ring_profile(model, x - y);
}

double degree(const GraphonModel& model, double x) {
  return std::visit(overloaded{
                        [](const FourierRing& m) { return m.coeffs[0]; },
                        [](const SmallWorld& m) {
                          return 2.0 * m.alpha * m.p + (1.0 - 2.0 * m.alpha) * m.q;
                        },
                        [](const ErdosRenyi& m) { return m.p; },
                        [&](const Bipartite& m) {
                          return x <= m.alpha ? m.p * (1.0 - m.alpha) : m.p * m.alpha;
                        },
                    },
                    model.variant());
}

std::vector<double> fourier_coefficients(const GraphonModel& model, int K) {
  if (K < 0) {
    throw std::invalid_argument("truncation K must be non-negative");
  }
  std::vector<double> c(static_cast<std::size_t>(K) + 1, 0.0);
  std::visit(overloaded{
                 [&](const FourierRing& m) {
                   for (std::size_t k = 0; k < c.size() && k < m.coeffs.size(); ++k) {
                     c[k] = m.coeffs[k];
                   }
                 },
                 [&](const SmallWorld& m) {
                   c[0] = 2.0 * m.alpha * m.p + (1.0 - 2.0 * m.alpha) * m.q;
                   for (int k = 1; k <= K; ++k) {
                     c[k] = (m.p - m.q) / (std::numbers::pi * k) * std::sin(kTwoPi * k * m.alpha);
                   }
                 },
                 [&](const ErdosRenyi& m) { c[0] = m.p; },
                 [](const Bipartite&) {
                   throw std::invalid_argument("bipartite graphon has no ring Fourier series");
                 },
             },
             model.variant());
  return c;
}

double GraphonSpectrum::eigenvalue(int k) const {
  const auto idx = static_cast<std::size_t>(std::abs(k));
  if (idx >= entries.size()) {
    throw std::out_of_range("mode beyond spectrum truncation");
  }
  return entries[idx].eigenvalue;
}

GraphonSpectrum graphon_spectrum(const GraphonModel& model, int K) {
  const auto c = fourier_coefficients(model, K);
  GraphonSpectrum spec;
  spec.accumulation_point = -c[0];
  spec.entries.reserve(c.size());
  for (int k = 0; k <= K; ++k) {
    spec.entries.push_back({k, c[k] - c[0], k == 0 ? 1 : 2});
  }
  return spec;
}

BipartiteSpectrum bipartite_spectrum(double p, double alpha) {
  if (!(p > 0.0 && p <= 1.0) || !(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("bipartite_spectrum: need p in (0,1], alpha in (0,1)");
  }
  BipartiteSpectrum s;
  s.levels = {{0.0, true}, {-p * alpha, false}, {-p * (1.0 - alpha), false}, {-p, true}};
  s.level_low = 1.0 - alpha;
  s.level_high = -alpha;
  return s;
}

}  // namespace graphturing
