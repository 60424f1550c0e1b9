#pragma once

// Brute-force reference computations for the tests. Nothing here calls the
// library's bit tricks or symmetry code: operators are Kronecker products of
// 2x2 matrices on the full 2^L space.

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// Single-site basis: index 0 = down, index 1 = up.
inline Mat sz() {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = -1.0;
    m(1, 1) = 1.0;
    return m;
}
inline Mat sp() {
    Mat m = Mat::Zero(2, 2);
    m(1, 0) = 1.0;
    return m;
}
inline Mat sm() { return sp().adjoint(); }

/// Operator acting as ops[j] on site j; site 0 is the least significant bit,
/// so it is the rightmost Kronecker factor.
inline Mat site_product(int L, const std::vector<std::pair<int, Mat>>& ops) {
    Mat out = Mat::Identity(1, 1);
    for (int site = L - 1; site >= 0; --site) {
        Mat local = Mat::Identity(2, 2);
        for (const auto& [s, op] : ops)
            if (s == site) local = op * local;
        Mat next = Eigen::kroneckerProduct(out, local).eval();
        out = next;
    }
    return out;
}

/// Periodic J1-gamma1-J2-gamma2 chain on all 2^L states.
inline Mat full_hamiltonian(int L, double j1, double g1, double j2, double g2) {
    const Eigen::Index n = Eigen::Index{1} << L;
    Mat h = Mat::Zero(n, n);
    const double hop[2] = {j1, j2};
    const double zz[2] = {g1, g2};
    for (int j = 0; j < L; ++j)
        for (int r = 1; r <= 2; ++r) {
            const int i = (j + r) % L;
            h += hop[r - 1] * (site_product(L, {{j, sp()}, {i, sm()}}) + site_product(L, {{j, sm()}, {i, sp()}}));
            h += zz[r - 1] * site_product(L, {{j, sz()}, {i, sz()}});
        }
    return h;
}

inline Mat full_sz(int L, int site) { return site_product(L, {{site, sz()}}); }

inline Mat full_a2(int L) {
    Mat a = Mat::Zero(Eigen::Index{1} << L, Eigen::Index{1} << L);
    for (int j = 0; j < L; ++j) a += site_product(L, {{j, sz()}, {(j + 1) % L, sz()}});
    return a / static_cast<double>(L);
}

inline Mat full_magnetization(int L) {
    Mat m = Mat::Zero(Eigen::Index{1} << L, Eigen::Index{1} << L);
    for (int j = 0; j < L; ++j) m += full_sz(L, j);
    return m;
}

/// Translation T: the spin on site j moves to site j + 1, built spin by spin.
inline Mat full_translation(int L) {
    const Eigen::Index n = Eigen::Index{1} << L;
    Mat t = Mat::Zero(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        Eigen::Index image = 0;
        for (int j = 0; j < L; ++j)
            if ((c >> j) & 1) image |= Eigen::Index{1} << ((j + 1) % L);
        t(image, c) = 1.0;
    }
    return t;
}

inline Vec product_state(int L, const std::function<bool(int)>& up) {
    Eigen::Index idx = 0;
    for (int j = 0; j < L; ++j)
        if (up(j)) idx |= Eigen::Index{1} << j;
    Vec v = Vec::Zero(Eigen::Index{1} << L);
    v[idx] = 1.0;
    return v;
}

/// Up on even sites.
inline Vec neel(int L) { return product_state(L, [](int j) { return j % 2 == 0; }); }

inline Vec neel_cat(int L) {
    return (neel(L) + product_state(L, [](int j) { return j % 2 == 1; })) / std::sqrt(2.0);
}

/// Sum over translates of the first L/2 sites up, normalized.
inline Vec domain_wall(int L) {
    const Vec base = product_state(L, [L](int j) { return j < L / 2; });
    const Mat t = full_translation(L);
    Vec acc = Vec::Zero(base.size());
    Vec cur = base;
    for (int r = 0; r < L; ++r) {
        acc += cur;
        cur = t * cur;
    }
    return acc / std::sqrt(static_cast<double>(L));
}

/// Indices of full-space states with the given magnetization (+-1 per spin).
inline std::vector<Eigen::Index> sector_indices(int L, int m_z) {
    std::vector<Eigen::Index> out;
    for (Eigen::Index c = 0; c < (Eigen::Index{1} << L); ++c) {
        int m = 0;
        for (int j = 0; j < L; ++j) m += ((c >> j) & 1) ? 1 : -1;
        if (m == m_z) out.push_back(c);
    }
    return out;
}

inline Mat restrict(const Mat& m, const std::vector<Eigen::Index>& idx) {
    Mat out(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = 0; b < idx.size(); ++b) out(a, b) = m(idx[a], idx[b]);
    return out;
}

inline Vec restrict(const Vec& v, const std::vector<Eigen::Index>& idx) {
    Vec out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t a = 0; a < idx.size(); ++a) out[a] = v[idx[a]];
    return out;
}

/// exp(M) by scaling and squaring with a degree-20 Taylor polynomial.
inline Mat expm(const Mat& m) {
    const double norm = m.cwiseAbs().colwise().sum().maxCoeff();
    int s = 0;
    if (norm > 0.5) s = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    const Mat a = m / std::ldexp(1.0, s);
    Mat term = Mat::Identity(m.rows(), m.cols());
    Mat sum = term;
    for (int k = 1; k <= 20; ++k) {
        term = (term * a) / static_cast<double>(k);
        sum += term;
    }
    for (int i = 0; i < s; ++i) sum = (sum * sum).eval();
    return sum;
}

/// <psi| e^{-iHt} A e^{iHt} |psi> by matrix exponentials.
inline double evolved_expectation(const Mat& h, const Mat& a, const Vec& psi, double t) {
    const Mat u = expm(cplx{0.0, 1.0} * t * h);  // e^{iHt}
    const Vec phi = u * psi;
    return phi.dot(a * phi).real();
}

/// Projector onto T-eigenvalue e^{-i 2 pi k / L}.
inline Mat momentum_projector(int L, int k) {
    const Mat t = full_translation(L);
    Mat p = Mat::Zero(t.rows(), t.cols());
    Mat tr = Mat::Identity(t.rows(), t.cols());
    for (int r = 0; r < L; ++r) {
        p += std::polar(1.0, 2.0 * std::numbers::pi * k * r / L) * tr;
        tr = t * tr;
    }
    return p / static_cast<double>(L);
}

inline int numerical_rank(const Mat& m, double tol = 1e-9) {
    Eigen::JacobiSVD<Mat> svd(m);
    int r = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > tol) ++r;
    return r;
}

/// Second central difference at 0 of an even or general function.
inline double second_difference(const std::function<double(double)>& f, double h) {
    return (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
}

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

/// Sorted eigenvalues of a Hermitian matrix.
inline Eigen::VectorXd eigenvalues(const Mat& h) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

}  // namespace oracle
