#pragma once

#include <string>

#include "levylmm/term_structure.hpp"

namespace levylmm {

/// Parses a market setup document:
///   tenor_dates  [T_0 .. T_{N+1}]
///   bond_prices  [B(0,T_1) .. B(0,T_{N+1})]
///   vols         N constants, or N arrays of per-interval levels
///   nig          {alpha, beta, delta_bar, mu}
///   em           {M, epsilon}
///   gauss        optional, c per accrual interval (default 0)
/// Throws std::invalid_argument on malformed input. Bad market data is left for
/// validate_setup to report.
MarketSetup parse_setup(const std::string& text);

MarketSetup load_setup(const std::string& path);

/// Location of the bundled February 2002 setup.
std::string bundled_setup_path();

}  // namespace levylmm
