#include "levylmm/term_structure.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace levylmm {

TenorStructure::TenorStructure(Eigen::VectorXd d) : dates(std::move(d)) {
  if (dates.size() < 3)
    throw std::invalid_argument("TenorStructure: need T_0 < T_1 < T_2 at least (N >= 1)");
  if (dates(0) != 0.0) throw std::invalid_argument("TenorStructure: T_0 must be 0");
  for (Eigen::Index i = 1; i < dates.size(); ++i)
    if (!(dates(i) > dates(i - 1)))
      throw std::invalid_argument("TenorStructure: dates must be strictly increasing");
}

Eigen::Index TenorStructure::interval_of(double s) const {
  // first date >= s, minus one
  const auto* begin = dates.data();
  const auto* end = begin + dates.size();
  const auto* it = std::lower_bound(begin + 1, end, s);
  Eigen::Index a = (it - begin) - 1;
  return std::clamp<Eigen::Index>(a, 0, dates.size() - 2);
}

VolatilityStructure VolatilityStructure::constant(const Eigen::VectorXd& per_rate) {
  const Eigen::Index n = per_rate.size();
  VolatilityStructure v;
  v.levels = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index r = 0; r < n; ++r) v.levels.row(r).head(r + 1).setConstant(per_rate(r));
  return v;
}

VolatilityStructure VolatilityStructure::piecewise(Eigen::MatrixXd raw) {
  if (raw.rows() != raw.cols())
    throw std::invalid_argument("VolatilityStructure: need N x N per-interval levels");
  for (Eigen::Index r = 0; r < raw.rows(); ++r)
    raw.row(r).tail(raw.cols() - r - 1).setZero();
  return VolatilityStructure{std::move(raw)};
}

Eigen::VectorXd initial_libor(const DiscountCurve& curve, const TenorStructure& tenor) {
  const Eigen::Index n = tenor.num_rates();
  if (curve.bonds.size() != n + 1)
    throw std::invalid_argument("initial_libor: need N+1 bond prices aligned to T_1..T_{N+1}");
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 1; i <= n; ++i) {
    const double ratio = curve.bond(i) / curve.bond(i + 1);
    if (!(curve.bond(i + 1) > 0.0) || !(ratio > 1.0)) {
      std::ostringstream msg;
      msg << "initial_libor: B(0,T_" << i << ")/B(0,T_" << i + 1 << ") = " << ratio
          << " is not > 1 (LR2 violated)";
      throw std::domain_error(msg.str());
    }
    out(i - 1) = (ratio - 1.0) / tenor.accrual(i);
  }
  return out;
}

double vol_at(double s, Eigen::Index i, const VolatilityStructure& vols, const TenorStructure& tenor) {
  if (i < 1 || i > vols.num_rates()) throw std::out_of_range("vol_at: rate index out of range");
  if (s < 0.0 || s > tenor.terminal()) throw std::out_of_range("vol_at: time outside [0, T*]");
  if (s > tenor.date(i)) return 0.0;
  return vols.level(i, tenor.interval_of(s));
}

MarketSetup MarketSetup::assemble(TenorStructure tenor, DiscountCurve curve, VolatilityStructure vols,
                                  LevyLocalTriplet driver, EmValidationConfig em) {
  const Eigen::Index n = tenor.num_rates();
  Eigen::VectorXd libor = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
  if (curve.bonds.size() == n + 1) {
    for (Eigen::Index i = 1; i <= n; ++i)
      libor(i - 1) = (curve.bond(i) / curve.bond(i + 1) - 1.0) / tenor.accrual(i);
  }
  return MarketSetup{std::move(tenor), std::move(curve), std::move(vols), std::move(driver), em,
                     std::move(libor)};
}

ValidationReport validate_setup(const MarketSetup& setup) {
  ValidationReport report;
  const Eigen::Index n = setup.num_rates();

  const bool shapes_ok = setup.curve.bonds.size() == n + 1 && setup.vols.levels.rows() == n &&
                         setup.vols.levels.cols() == n &&
                         setup.driver.drift.size() == n + 1 && setup.driver.gauss.size() == n + 1;
  report.checks.push_back({"shapes", shapes_ok, static_cast<double>(n), 0.0,
                           "bonds N+1, vols N x N, driver characteristics per accrual interval"});
  if (!shapes_ok) return report;

  bool params_ok = true;
  std::string params_detail = "NIG parameters valid";
  try {
    setup.driver.jumps.validate();
  } catch (const std::invalid_argument& e) {
    params_ok = false;
    params_detail = e.what();
  }
  report.checks.push_back({"nig_params", params_ok, 0.0, 0.0, params_detail});

  const bool martingale = (setup.driver.drift.array() == 0.0).all();
  report.checks.push_back({"driver_martingale", martingale, setup.driver.drift.cwiseAbs().maxCoeff(),
                           0.0, "driver drift b_s must vanish under the terminal measure"});
  const bool gauss_ok = (setup.driver.gauss.array() >= 0.0).all();
  report.checks.push_back({"gauss_nonnegative", gauss_ok, setup.driver.gauss.minCoeff(), 0.0,
                           "c_s >= 0"});

  if (params_ok) report.append(validate_em(setup.vols.levels, setup.em, setup.driver.jumps));

  // LR2: strictly positive, strictly decreasing bonds
  Eigen::Index bad = 0;
  for (Eigen::Index i = 1; i <= n + 1 && bad == 0; ++i) {
    if (!(setup.curve.bond(i) > 0.0) || !(setup.curve.bond(i) < setup.curve.bond(i - 1))) bad = i;
  }
  std::ostringstream lr2;
  if (bad == 0)
    lr2 << "bonds strictly positive and decreasing";
  else
    lr2 << "B(0,T_" << bad << ") breaks positivity or strict decrease";
  report.checks.push_back({"lr2_bonds", bad == 0, static_cast<double>(bad), 0.0, lr2.str()});

  const double min_rate = setup.initial_libor.minCoeff();
  report.checks.push_back({"initial_libor_positive", min_rate > 0.0, min_rate, 0.0,
                           "all L(0,T_i) > 0"});
  return report;
}

}  // namespace levylmm
