#pragma once

#include "ergorate/models.hpp"

// Simulable rotation chain observing the zero function.
inline ergorate::FourierDiagonalModel zero_chain() {
    auto m = ergorate::build_rotation_chain(4);
    for (auto& md : m.modes) md.coeff = 0.0;
    return m;
}
