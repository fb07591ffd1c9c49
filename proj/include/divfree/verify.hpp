#pragma once

#include <string>
#include <utility>
#include <vector>

#include "divfree/fields.hpp"
#include "divfree/solver.hpp"
#include "divfree/space.hpp"

namespace divfree {

/// Exponent family of the interpolation theorem for (d, r, p_hat).
struct ExponentSet {
  int d = 3;
  double r = 2.0;
  double p_hat = 6.0;
  double k = 1.0;
  double theta = 0.0;
  double q_theta = 6.0;
  double p_theta = 1.2;
  double s = 1.2;  // Hoelder conjugate of q_theta
  double q0 = 6.0;
  double p0 = 1.2;
  double p1 = 2.0;

  struct Identity {
    std::string name;
    double defect = 0.0;
  };
  /// The four defining identities with their absolute defects.
  std::vector<Identity> identities() const;
};

/// Throws std::invalid_argument unless d >= 3, 2 <= r <= d, p_hat > d;
/// throws NumericalError{"exponent_identity"} if an identity fails by more than 1e-12.
ExponentSet exponent_set(int d, double r, double p_hat);

enum class VerdictStatus { holds, violated, not_applicable };

inline constexpr double kVerdictSlack = 1e-8;

/// One inequality lhs <= rhs, judged with `slack` relative tolerance.
struct Verdict {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // lhs / rhs (0 when both vanish)
  double slack = 0.0;
  VerdictStatus status = VerdictStatus::holds;
  bool hard = true;     // failing hard verdicts make a run fail
  std::string note;

  bool ok() const { return status != VerdictStatus::violated; }
  std::string status_text() const;
};


Verdict make_verdict(std::string name, double lhs, double rhs, double slack = kVerdictSlack);

/// ||grad u|| <= 2(d-1)/((d-2) lambda) ||f||_{L^{2d/(d+2)}}.
Verdict check_energy(const DiscreteFunction& u, const ScalarField& f, double lambda, int d);
/// Same with ||f||_{L^{2d/(d+2)}} already computed.
Verdict check_energy(const DiscreteFunction& u, double f_norm, double lambda, int d);

/// ||u||_inf / ||f||_{L^{p_hat d/(d+p_hat)}}.
double linf_ratio(const DiscreteFunction& u, const ScalarField& f, double p_hat);

/// Band check on a ratio sequence: max <= band * median.
Verdict check_linf_band(const std::vector<double>& ratios, double band = 1.05);

struct EffectiveConstants {
  double c1 = 0.0;  // sup ||u||_{L^{q0}} / ||f||_{L^{p0}}
  double c2 = 0.0;  // sup ||u||_inf / ||f||_{L^{p1}}
  bool calibrated = false;
  int samples = 0;
};

/// ||u||_{L^{q_theta}} <= C1^{1/k} C2^{1-1/k} ||f||_{L^{p_theta}}.
/// Throws std::logic_error("calibrate first") without calibrated constants.
Verdict check_interpolation(const DiscreteFunction& u, const ScalarField& f, const ExponentSet& e,
                            const EffectiveConstants& c);

struct CalibrationSample {
  std::string data;
  double level = 0.0;
  double ratio_c1 = 0.0;
  double ratio_c2 = 0.0;
};

struct Calibration {
  EffectiveConstants constants;
  std::vector<CalibrationSample> samples;
};

/// Constants 1, sines and Gaussian bumps sized to the grid's box.
std::vector<std::pair<std::string, ScalarField>> calibration_family(const GridSpec& grid);

/// Envelope of the two endpoint ratios over data x truncation levels of c.
Calibration calibrate(const Coefficients& coefficients, const GridSpec& grid, const std::vector<double>& ladder,
                      const ExponentSet& e, const std::vector<std::pair<std::string, ScalarField>>& family,
                      const SolverOptions& options = {});

struct MaxPrincipleResult {
  bool applicable = false;
  std::size_t positive_offdiagonals = 0;
  bool data_nonpositive = false;
  double max_u = 0.0;
  double linf = 0.0;
  Verdict verdict;
};

/// Weak maximum principle diagnostic: with nonpositive off-diagonals and
/// f <= 0, max nodal u <= 1e-8 ||u||_inf.
MaxPrincipleResult max_principle_diagnostic(const DiscreteProblem& problem, const ScalarField& f,
                                            const DiscreteFunction& u);

}  // namespace divfree
