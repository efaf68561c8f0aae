#pragma once

#include <cmath>

#include "tactsim/core/error.hpp"

namespace tactsim {

struct GelParams {
    double elasticity_kpa = 841.509;
    double poisson_ratio = 0.464;
    double friction = 0.987;

    void validate() const {
        require(elasticity_kpa > 0.0, "gel/params", "elasticity modulus must be positive");
        require(poisson_ratio >= 0.0 && poisson_ratio < 0.5 + 1e-12, "gel/params",
                "poisson ratio must lie in [0, 0.5]");
        require(friction > 0.0 && friction <= 1.0, "gel/params",
                "friction coefficient must lie in (0, 1]");
    }
};

struct CalibrationBounds {
    double e_lo = 838.0, e_hi = 970.0;      // kPa
    double nu_lo = 0.45, nu_hi = 0.5;
    double mu_lo = 0.5, mu_hi = 0.99;

    void validate() const {
        require(e_lo < e_hi && nu_lo < nu_hi && mu_lo < mu_hi, "calibration/bounds",
                "each bound must have lower < upper");
        GelParams lo{e_lo, nu_lo, mu_lo};
        GelParams hi{e_hi, nu_hi, mu_hi};
        lo.validate();
        hi.validate();
    }

    GelParams midpoint() const {
        return GelParams{0.5 * (e_lo + e_hi), 0.5 * (nu_lo + nu_hi), 0.5 * (mu_lo + mu_hi)};
    }
};

// Empirical Shore-A hardness to Young's modulus map, in kPa. The denominator
// vanishes at S = 100, so the hardness scale's open interval is enforced.
inline double gent_modulus(double shore_a) {
    require(shore_a > 0.0 && shore_a < 100.0, "gent/range",
            "shore hardness must lie strictly inside (0, 100)");
    const double mpa = 0.0981 * (56.0 + 7.62336 * shore_a) /
                       (0.137505 * (254.0 - 2.54 * shore_a));
    return mpa * 1000.0;
}

}  // namespace tactsim
