#pragma once

#include <numbers>
#include <string_view>

namespace feynbody {

enum class UnitSystem { Dimensionless, SI };

/// Physical constants of a run. `coulomb` is 1/(4 pi eps0).
struct Constants {
    double c = 1.0;
    double coulomb = 1.0;

    static constexpr Constants dimensionless() { return {1.0, 1.0}; }
    static constexpr Constants si() {
        constexpr double eps0 = 8.8541878128e-12;
        return {299792458.0, 1.0 / (4.0 * std::numbers::pi * eps0)};
    }
    static constexpr Constants of(UnitSystem u) {
        return u == UnitSystem::SI ? si() : dimensionless();
    }
};

constexpr std::string_view to_string(UnitSystem u) {
    return u == UnitSystem::SI ? "SI" : "dimensionless";
}

}  // namespace feynbody
