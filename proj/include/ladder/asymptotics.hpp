#ifndef LADDER_ASYMPTOTICS_HPP
#define LADDER_ASYMPTOTICS_HPP

#include <map>
#include <string>
#include <vector>

#include "ladder/increments.hpp"
#include "ladder/lattice_exact.hpp"
#include "ladder/series.hpp"

namespace ladder {

struct ReportRow {
    long n = 0;
    double measured = 0.0;
    double predicted = 0.0;
    double ratio = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

/// Measured-vs-predicted table for one limit law. The verdict is a pure
/// function of the rows and the declared tolerance: it uses the largest
/// grid point only (all limits here are asymptotic; the smaller n show the
/// trend). Tolerances are declared up front and nonincreasing in n.
struct AsymptoticReport {
    std::string theorem_id;
    std::string model;
    std::string note;
    std::vector<ReportRow> rows;
    double tolerance = 0.0; // applied at the verdict row
    bool pass = false;
    std::map<std::string, double> calibration;

    std::string to_json() const;
    std::string to_table() const;
};

/// "n,measured,predicted,ratio,ci_lo,ci_hi" rows, 17 significant digits.
std::string report_plot_csv(const AsymptoticReport& report);

struct CalibrationConstants {
    double g0_hat = 0.0;
    double cn_scale = 1.0;
    std::string provenance;
};

/// g0_hat = c_n P(S_n = 0) / h from the unconditioned local limit at n.
CalibrationConstants calibrate_g0(const IncrementModel& model, long n);

/// Tolerance schedule: base at n >= 2000, inflated like sqrt(2000/n) below,
/// so it is nonincreasing in n. Exact oracles use base 0.02, Monte Carlo
/// routes 0.10.
double tolerance_schedule(long n, double base);

inline const std::vector<long>& default_grid() {
    static const std::vector<long> g = {250, 500, 1000, 2000, 4000};
    return g;
}

/// Theorem "main": r_n = n P(tau- = n) / P(tau- > n) -> 1 - rho.
AsymptoticReport verify_local_law_minus(const LadderPmf& tau_minus, double rho,
                                        std::vector<long> grid = default_grid());

/// Theorem "main-prime": r+_n = n P(tau+ = n) / P(tau+ > n) -> rho.
AsymptoticReport verify_local_law_plus(const LadderPmf& tau_plus, double rho,
                                       std::vector<long> grid = default_grid());

/// Theorem "omega-ratio": P(T- = n)/P(tau- = n) -> Omega(1).
AsymptoticReport verify_omega_ratio(const PowerSeries& t_minus, const PowerSeries& tau_minus,
                                    const OmegaTotal& omega_sum,
                                    std::vector<long> grid = default_grid());

/// "small-dev": flatness of rho_j = n c_n b_n(j) / (h H(j-1)) over j in
/// [1, j_hi] and its match to the unconditioned calibration g0_hat.
AsymptoticReport verify_small_deviations(const IncrementModel& model, long n, long j_hi = 10,
                                         double tol = 0.05);

/// "renewal": log-log slope of H over [x_max/100, x_max] against alpha*rho
/// (or 1 when alpha*rho = 1).
AsymptoticReport verify_renewal_asymptotics(const RenewalTable& renewal,
                                            const IncrementModel& model);

/// "spitzer": Cesaro mean of P(S_n > 0) against rho, with the pointwise
/// values recorded alongside.
AsymptoticReport spitzer_doney_diagnostic(const SignSequence& signs, double rho,
                                          std::vector<long> grid = default_grid());

} // namespace ladder

#endif
