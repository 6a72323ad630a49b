#ifndef LADDER_INCREMENTS_HPP
#define LADDER_INCREMENTS_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ladder/rng.hpp"

namespace ladder {

enum class ModelKind { FiniteLattice, LatticePareto, TwoSidedPareto };

enum class Direction { Minus, Plus };

/// Two-sided tail functions of an increment law. All three are
/// nonincreasing and left(x) + right(x) == two_sided(x) pointwise.
struct TailProfile {
    std::function<double(double)> right;     // x -> P(X > x)
    std::function<double(double)> left;      // x -> F(-x) = P(X <= -x)
    std::function<double(double)> two_sided; // x -> 1 - F(x) + F(-x)
};

/// An increment distribution with its stable-domain metadata (alpha, beta,
/// tail weights p/q, lattice span). Immutable after construction; cheap to
/// copy and safe to share across threads.
///
/// Families:
///  - FiniteLattice: explicit pmf on {k_min..k_max} * span, zero mean,
///    finite variance (alpha = 2, beta = 0).
///  - LatticePareto: P(X = k) proportional to |k|^(-alpha-1), right weight p,
///    left weight q, truncated at +-k_tail with the residual tail mass lumped
///    onto the boundary atoms.
///  - TwoSidedPareto: continuous, P(X > x) = p(1+x)^(-alpha) and
///    P(X <= -x) = q(1+x)^(-alpha) for x >= 0; mean-centered by
///    -(p-q)/(alpha-1) when alpha > 1.
class IncrementModel {
  public:
    static IncrementModel finite_lattice(const std::vector<double>& pmf, long k_min,
                                         double span = 1.0);
    static IncrementModel lattice_pareto(double alpha, double p, double q,
                                         long k_tail = 1000000, double span = 1.0);
    static IncrementModel two_sided_pareto(double alpha, double p, double q,
                                           bool centered = true);

    ModelKind kind() const { return kind_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    double p() const { return p_; }
    double q() const { return q_; }
    double span() const { return span_; }
    bool is_lattice() const { return kind_ != ModelKind::TwoSidedPareto; }
    /// Centering shift that was subtracted from the raw variable (continuous only).
    double shift() const { return shift_; }

    /// Lattice support in lattice units: pmf()[i] = P(X = (k_min()+i)*span).
    const std::vector<double>& lattice_pmf() const;
    long k_min() const;
    long k_max() const;

    double mean() const { return mean_; }
    double variance() const { return variance_; }

    double cdf(double x) const;
    double right_tail(double x) const; // P(X > x)
    double left_tail(double x) const;  // P(X <= -x)
    double two_sided_tail(double x) const { return right_tail(x) + left_tail(x); }
    TailProfile tail_profile() const;

    /// One variate. Inverse-cdf for the continuous family, cumulative-table
    /// lookup for lattice families.
    double sample(RngStream& stream) const;
    /// Lattice-only: variate in lattice units.
    long sample_lattice(RngStream& stream) const;

    /// Period of the set {n : P(S_n = 0) > 0} on the span-reduced lattice;
    /// 1 means aperiodic. Lattice-only.
    long period_at_zero() const;

    /// Mass lumped onto the +-k_tail atoms (LatticePareto), else 0. Documents
    /// the per-step tail truncation error bound.
    double lumped_tail_mass() const { return lumped_mass_; }

    uint64_t hash() const;
    std::string describe() const;

  private:
    IncrementModel() = default;

    ModelKind kind_ = ModelKind::FiniteLattice;
    double alpha_ = 2.0, beta_ = 0.0, p_ = 0.5, q_ = 0.5, span_ = 1.0;
    double shift_ = 0.0;
    double mean_ = 0.0, variance_ = 0.0;
    double lumped_mass_ = 0.0;

    struct LatticeData {
        std::vector<double> pmf;    // support k_min .. k_min + pmf.size() - 1
        std::vector<double> cum;    // inclusive prefix sums of pmf
        std::vector<double> suffix; // suffix[i] = sum_{j >= i} pmf[j]
        long k_min = 0;
    };
    std::shared_ptr<const LatticeData> lat_;
};

/// Positivity index rho = 1/2 + arctan(beta tan(pi alpha / 2)) / (pi alpha).
/// Rejects parameter pairs outside the admissible set (alpha = 1, or
/// alpha < 1 with |beta| = 1).
double rho_index(double alpha, double beta);

/// c_n: for alpha < 2 the generalized inverse inf{x >= 0 : 1-F(x)+F(-x) <= 1/n}
/// found by bisection on the tail profile; for alpha = 2 (finite variance)
/// sqrt(n * Var X). The alpha = 2 scale constant is calibrated empirically
/// downstream, not tracked analytically.
double normalizing_sequence(const IncrementModel& model, long n);

struct QuadratureResult {
    double value = 0.0;
    double error_bound = 0.0;
};

/// g_{alpha,beta}(0) = (1/pi) Int_0^inf exp(-c t^alpha) cos(c beta tan(pi
/// alpha/2) t^alpha) dt by adaptive quadrature (absolute tolerance tol).
/// Throws on non-convergence, reporting the achieved error bound.
double stable_density_at_zero(double alpha, double beta, double scale_c,
                              double tol = 1e-10, QuadratureResult* detail = nullptr);

struct DoneyCondition {
    bool converges = false;
    double partial_integral = 0.0; // numeric integral up to t_max
    double t_max = 0.0;
};

/// Convergence of Int_1^inf F(-x) / (x (1-F(x))) dx (direction Minus) or the
/// mirrored integral (Plus), classified analytically for the built-in
/// families and accompanied by the numeric partial integral.
DoneyCondition doney_integral_condition(const IncrementModel& model, Direction dir,
                                        double t_max = 1e6);

} // namespace ladder

#endif
