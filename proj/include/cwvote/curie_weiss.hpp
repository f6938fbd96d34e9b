#pragma once

// Spontaneous magnetization m(beta): the largest solution of tanh(beta x) = x.
// m = 0 for beta <= 1, 0 < m < 1 for beta > 1, and m(+inf) = 1. An infinite
// coupling is represented by std::numeric_limits<double>::infinity().

namespace cwvote {

double m_of_beta(double beta);

// dm/dbeta for beta > 1 from implicit differentiation of tanh(beta m) = m.
double m_prime(double beta);

// Inverse of m on (1, inf): artanh(y) / y for y in (0, 1).
double m_inverse(double y);

// 1 - m(beta), accurate where m itself rounds to 1 (beta above ~19).
double magnetization_gap(double beta);

// Inverse of magnetization_gap for gap in (0, 1).
double m_inverse_from_gap(double gap);

} // namespace cwvote
