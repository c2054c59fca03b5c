// Copyright 2026 The MTMS Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mtms/spin.h"

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "mtms/errors.h"

namespace mtms {

std::string_view to_string(SpinBasis basis) {
    switch (basis) {
        case SpinBasis::sigma_x_sum:
            return "sigma_x_sum";
        case SpinBasis::sigma_y_difference:
            return "sigma_y_difference";
    }
    return "unknown";
}

SpinBasis spin_basis_from_string(std::string_view name) {
    if (name == "sigma_x_sum") {
        return SpinBasis::sigma_x_sum;
    }
    if (name == "sigma_y_difference") {
        return SpinBasis::sigma_y_difference;
    }
    throw DomainError("unknown spin basis '" + std::string(name) + "'");
}

namespace spin {

namespace {

using cd = std::complex<double>;

Eigen::Matrix2cd pauli_x() {
    Eigen::Matrix2cd m;
    m << 0, 1, 1, 0;
    return m;
}

Eigen::Matrix2cd pauli_y() {
    Eigen::Matrix2cd m;
    m << 0, cd(0, -1), cd(0, 1), 0;
    return m;
}

Eigen::Matrix2cd pauli_z() {
    Eigen::Matrix2cd m;
    m << 1, 0, 0, -1;
    return m;
}

Matrix4c kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
    Matrix4c out;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
        }
    }
    return out;
}

Matrix4c on_ion(int ion, const Eigen::Matrix2cd& op) {
    const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
    return ion == 0 ? kron(op, id) : kron(id, op);
}

}  // namespace

std::array<double, 2> ion_phases(SpinBasis basis) {
    if (basis == SpinBasis::sigma_y_difference) {
        return {-std::numbers::pi / 2, std::numbers::pi / 2};
    }
    return {0.0, 0.0};
}

Matrix4c raising(int ion) {
    Eigen::Matrix2cd sp;
    sp << 0, 1, 0, 0;
    return on_ion(ion, sp);
}

Matrix4c collective(SpinBasis basis) {
    const auto phases = ion_phases(basis);
    Matrix4c s = Matrix4c::Zero();
    for (int ion = 0; ion < 2; ++ion) {
        s += on_ion(ion, std::cos(phases[ion]) * pauli_x() - std::sin(phases[ion]) * pauli_y());
    }
    return s;
}

Vector4c ground() { return Vector4c::Unit(0); }

Vector4c phase_gate_on_ground(SpinBasis basis, double phase) {
    Eigen::SelfAdjointEigenSolver<Matrix4c> eig(collective(basis));
    const auto& vecs = eig.eigenvectors();
    const auto& vals = eig.eigenvalues();
    Vector4c out = Vector4c::Zero();
    const Vector4c g = ground();
    for (int a = 0; a < 4; ++a) {
        cd amp = vecs.col(a).dot(g);
        out += vecs.col(a) * amp * std::exp(cd(0, phase * vals(a) * vals(a)));
    }
    return out;
}

Vector4c ideal_target(SpinBasis basis) { return phase_gate_on_ground(basis, std::numbers::pi / 8); }

Matrix4c analysis_pulse(double phi) {
    const Eigen::Matrix2cd gen = std::cos(phi) * pauli_x() + std::sin(phi) * pauli_y();
    // exp(-i theta n.sigma) = cos(theta) - i sin(theta) n.sigma
    const double theta = std::numbers::pi / 4;
    const Eigen::Matrix2cd r = std::cos(theta) * Eigen::Matrix2cd::Identity() - cd(0, std::sin(theta)) * gen;
    return kron(r, r);
}

std::array<double, 3> bright_count_probabilities(const Matrix4c& rho) {
    return {rho(0, 0).real(), rho(1, 1).real() + rho(2, 2).real(), rho(3, 3).real()};
}

double parity(const Matrix4c& rho) {
    const Matrix4c zz = kron(pauli_z(), pauli_z());
    return (zz * rho).trace().real();
}

double parity_after_pulse(const Matrix4c& rho, double phi) {
    const Matrix4c r = analysis_pulse(phi);
    return parity(r * rho * r.adjoint());
}

double parity_phase(const Matrix4c& rho) {
    // Pi(phi) = offset + u cos(2 phi) - v sin(2 phi), with (u, v) = A (cos phi0, sin phi0).
    const double p0 = parity_after_pulse(rho, 0);
    const double p90 = parity_after_pulse(rho, std::numbers::pi / 2);
    const double p45 = parity_after_pulse(rho, std::numbers::pi / 4);
    const double offset = 0.5 * (p0 + p90);
    const double u = p0 - offset;
    const double v = -(p45 - offset);
    return std::atan2(v, u);
}

std::complex<double> bell_coherence(const Matrix4c& rho) { return rho(0, 3); }

}  // namespace spin
}  // namespace mtms
