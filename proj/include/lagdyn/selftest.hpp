#pragma once

#include <iosfwd>

namespace lagdyn::selftest {

/// Analytic-oracle suite: closure of the assembled dynamics against the
/// direct formulas, Coriolis finite-difference check, energy conservation,
/// SPD guarantee, rollout gradient check, and two mutation fixtures that
/// must be caught. Prints one row per check; returns true when all pass.
bool run(std::ostream& out);

} // namespace lagdyn::selftest
