#pragma once

#include <string>
#include <variant>
#include <vector>

namespace graphturing {

/// Ring graphon given by a truncated cosine series
/// R(d) = c_0 + 2 sum_{k=1}^{K} c_k cos(2 pi k d).
struct FourierRing {
  std::vector<double> coeffs;  // c_0 .. c_K
};

/// Watts-Strogatz style ring graphon: p within ring distance alpha, q otherwise.
struct SmallWorld {
  double p = 0.0;
  double q = 0.0;
  double alpha = 0.0;
};

struct ErdosRenyi {
  double p = 0.0;
};

/// Two-block graphon: weight p between [0, alpha] and (alpha, 1], zero inside blocks.
struct Bipartite {
  double p = 0.0;
  double alpha = 0.0;
};

/// Immutable, validated graphon description. Construct through the named factories.
class GraphonModel {
 public:
  using Variant = std::variant<FourierRing, SmallWorld, ErdosRenyi, Bipartite>;

  static GraphonModel fourier_ring(std::vector<double> coeffs);
  static GraphonModel small_world(double p, double q, double alpha);
  static GraphonModel erdos_renyi(double p);
  static GraphonModel bipartite(double p, double alpha);

  /// The 2:1 resonance kernel 1/2 + cos(2 pi d)/4 + cos(4 pi d)/4.
  static GraphonModel resonance_example();

  const Variant& variant() const { return variant_; }
  bool is_ring() const { return !std::holds_alternative<Bipartite>(variant_); }
  std::string name() const;

 private:
  explicit GraphonModel(Variant v) : variant_(std::move(v)) {}
  Variant variant_;
};

/// Minimal ring distance min(|d|, 1 - |d|) for d taken modulo 1.
double ring_distance(double d);

/// Kernel W(x, y) for x, y in [0, 1].
double evaluate(const GraphonModel& model, double x, double y);

/// Profile R(d) of a ring graphon, d in [0, 1] (1-periodic, even).
double ring_profile(const GraphonModel& model, double d);

/// Degree function Deg(x) = int_0^1 W(x, y) dy, in closed form.
double degree(const GraphonModel& model, double x);

/// Fourier coefficients c_0 .. c_K of a ring graphon (c_{-k} = c_k).
std::vector<double> fourier_coefficients(const GraphonModel& model, int K);

struct SpectrumEntry {
  int mode = 0;
  double eigenvalue = 0.0;
  int multiplicity = 1;
};

/// Point spectrum of a ring graphon Laplacian, lambda_k = c_k - c_0, plus the
/// accumulation point -c_0.
struct GraphonSpectrum {
  std::vector<SpectrumEntry> entries;
  double accumulation_point = 0.0;

  /// Eigenvalue of mode |k|; throws std::out_of_range past the truncation.
  double eigenvalue(int k) const;
};

inline constexpr int kDefaultTruncation = 64;

GraphonSpectrum graphon_spectrum(const GraphonModel& model, int K = kDefaultTruncation);

struct BipartiteSpectrum {
  struct Level {
    double eigenvalue;
    bool isolated;  // one-dimensional eigenspace
  };
  // Ordered 0, -p alpha, -p (1 - alpha), -p.
  std::vector<Level> levels;
  // Eigenfunction of -p normalised with C = 1: value on [0, alpha) and on (alpha, 1].
  double level_low = 0.0;
  double level_high = 0.0;
};

BipartiteSpectrum bipartite_spectrum(double p, double alpha);

}  // namespace graphturing
