#pragma once

// Numerical tolerances shared across the library. Every threshold used by a
// predicate lives here so tests and the CLI agree on them.

namespace hiord::tol {

inline constexpr double kGraphWeight = 1e-12;        // structural graph equality, balance test
inline constexpr double kRank = 1e-9;                // relative rank threshold (controllability, PBH)
inline constexpr double kCanonical = 1e-9;           // canonical-form shape check
inline constexpr double kStochastic = 1e-9;          // row sums / negativity for stochastic matrices
inline constexpr double kStochasticClip = 1e-12;     // negative dirt clipped before tau()
inline constexpr double kTimeEps = 1e-9;             // switch-time coincidence
inline constexpr double kDivergenceGuard = 1e12;     // max |state| before a run is declared divergent
inline constexpr double kConsensus = 1e-3;           // default consensus tolerance
inline constexpr double kConsensusWindowFraction = 0.1;
inline constexpr double kDefaultDt = 1e-3;
inline constexpr double kObserverPlacement = 1e-7;   // coefficientwise placement residual
inline constexpr double kIllConditioned = 1e10;      // observability-matrix condition warning

}  // namespace hiord::tol
