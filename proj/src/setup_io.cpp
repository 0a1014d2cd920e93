#include "levylmm/setup_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "levylmm/validation.hpp"

namespace levylmm {

using nlohmann::json;

namespace {

Eigen::VectorXd to_vector(const json& j, const char* field) {
  if (!j.is_array()) throw std::invalid_argument(std::string("setup: '") + field + "' must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number())
      throw std::invalid_argument(std::string("setup: '") + field + "' must hold numbers");
    v(static_cast<Eigen::Index>(k)) = j[k].get<double>();
  }
  return v;
}

const json& require(const json& doc, const char* field) {
  if (!doc.contains(field)) throw std::invalid_argument(std::string("setup: missing field '") + field + "'");
  return doc.at(field);
}

VolatilityStructure parse_vols(const json& j, Eigen::Index n) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n)
    throw std::invalid_argument("setup: 'vols' needs one entry per rate");
  if (j.empty() || j[0].is_number()) return VolatilityStructure::constant(to_vector(j, "vols"));

  Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::VectorXd row = to_vector(j[r], "vols");
    if (row.size() < r + 1 || row.size() > n)
      throw std::invalid_argument("setup: per-interval vols of rate i need between i and N levels");
    raw.row(r).head(row.size()) = row.transpose();
  }
  return VolatilityStructure::piecewise(std::move(raw));
}

}  // namespace

MarketSetup parse_setup(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("setup: ") + e.what());
  }
  try {
    TenorStructure tenor(to_vector(require(doc, "tenor_dates"), "tenor_dates"));
    const Eigen::Index n = tenor.num_rates();
    DiscountCurve curve{to_vector(require(doc, "bond_prices"), "bond_prices")};
    if (curve.bonds.size() != n + 1)
      throw std::invalid_argument("setup: 'bond_prices' must align with T_1..T_{N+1}");
    VolatilityStructure vols = parse_vols(require(doc, "vols"), n);

    const json& nig = require(doc, "nig");
    NigParams p;
    p.alpha = require(nig, "alpha").get<double>();
    p.beta = nig.value("beta", 0.0);
    p.delta_bar = require(nig, "delta_bar").get<double>();
    p.mu = nig.value("mu", 0.0);

    LevyLocalTriplet driver = LevyLocalTriplet::pure_jump(p, n + 1);
    if (doc.contains("gauss")) {
      driver.gauss = to_vector(doc.at("gauss"), "gauss");
      if (driver.gauss.size() != n + 1)
        throw std::invalid_argument("setup: 'gauss' needs one entry per accrual interval");
    }

    EmValidationConfig em;
    const json& emj = require(doc, "em");
    em.M = require(emj, "M").get<double>();
    em.epsilon = require(emj, "epsilon").get<double>();

    return MarketSetup::assemble(std::move(tenor), std::move(curve), std::move(vols), std::move(driver), em);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("setup: ") + e.what());
  }
}

MarketSetup load_setup(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("setup: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_setup(ss.str());
}

std::string bundled_setup_path() { return std::string(LEVYLMM_DATA_DIR) + "/euro_feb2002.json"; }

std::string ValidationReport::to_json() const {
  json out;
  out["passed"] = passed();
  out["checks"] = json::array();
  for (const auto& c : checks)
    out["checks"].push_back(
        {{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"bound", c.bound}, {"detail", c.detail}});
  return out.dump(2);
}

}  // namespace levylmm
