#pragma once

// Sign convention of the cubic term.  With the defocusing sign the
// interaction-representation system reads
//
//     d/dt v_n = +i * sum_{n = n1 - n2 + n3} e^{-i Phi t} v_{n1} conj(v_{n2}) v_{n3},
//
// and the focusing sign flips the prefactor to -i.

#include <complex>

namespace nlsnf {

enum class SignConvention { Defocusing, Focusing };

inline std::complex<double> nonlinearity_prefactor(SignConvention s) {
  return s == SignConvention::Defocusing ? std::complex<double>{0.0, 1.0}
                                         : std::complex<double>{0.0, -1.0};
}

}  // namespace nlsnf
