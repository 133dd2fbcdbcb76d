#pragma once

// Small fixed-size algebra: 3-vectors and 3x3 linear maps.

#include <array>
#include <cmath>
#include <cstddef>

namespace feynbody {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr double& operator[](std::size_t i) { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr double operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec3& operator+=(const Vec3& o) {
        x += o.x; y += o.y; z += o.z;
        return *this;
    }
    constexpr Vec3& operator-=(const Vec3& o) {
        x -= o.x; y -= o.y; z -= o.z;
        return *this;
    }
    constexpr Vec3& operator*=(double s) {
        x *= s; y *= s; z *= s;
        return *this;
    }

    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
constexpr Vec3 operator/(const Vec3& a, double s) { return {a.x / s, a.y / s, a.z / s}; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// Row-major 3x3 matrix acting on Vec3 by h -> M h.
struct LinMap3 {
    std::array<double, 9> m{};

    static constexpr LinMap3 zero() { return {}; }
    static constexpr LinMap3 identity() {
        LinMap3 r;
        r.m[0] = r.m[4] = r.m[8] = 1.0;
        return r;
    }
    /// a b^T
    static constexpr LinMap3 outer(const Vec3& a, const Vec3& b) {
        LinMap3 r;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) r.m[3 * i + j] = a[i] * b[j];
        return r;
    }
    /// h -> a x h
    static constexpr LinMap3 cross_matrix(const Vec3& a) {
        LinMap3 r;
        r.m = {0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0};
        return r;
    }

    constexpr double& operator()(std::size_t i, std::size_t j) { return m[3 * i + j]; }
    constexpr double operator()(std::size_t i, std::size_t j) const { return m[3 * i + j]; }

    constexpr Vec3 apply(const Vec3& h) const {
        return {m[0] * h.x + m[1] * h.y + m[2] * h.z,
                m[3] * h.x + m[4] * h.y + m[5] * h.z,
                m[6] * h.x + m[7] * h.y + m[8] * h.z};
    }
    constexpr Vec3 operator()(const Vec3& h) const { return apply(h); }

    constexpr LinMap3& operator+=(const LinMap3& o) {
        for (std::size_t i = 0; i < 9; ++i) m[i] += o.m[i];
        return *this;
    }
    constexpr LinMap3& operator-=(const LinMap3& o) {
        for (std::size_t i = 0; i < 9; ++i) m[i] -= o.m[i];
        return *this;
    }
    constexpr LinMap3& operator*=(double s) {
        for (auto& v : m) v *= s;
        return *this;
    }

    constexpr double det() const {
        return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
               m[2] * (m[3] * m[7] - m[4] * m[6]);
    }

    constexpr double max_abs() const {
        double r = 0.0;
        for (double v : m) r = (v < 0 ? -v : v) > r ? (v < 0 ? -v : v) : r;
        return r;
    }

    friend constexpr bool operator==(const LinMap3&, const LinMap3&) = default;
};

constexpr LinMap3 operator+(LinMap3 a, const LinMap3& b) { return a += b; }
constexpr LinMap3 operator-(LinMap3 a, const LinMap3& b) { return a -= b; }
constexpr LinMap3 operator*(double s, LinMap3 a) { return a *= s; }

/// Composition (a o b)(h) = a(b(h)).
constexpr LinMap3 compose(const LinMap3& a, const LinMap3& b) {
    LinMap3 r;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
            r(i, j) = s;
        }
    return r;
}

/// Solves M x = b by Gaussian elimination with partial pivoting.
/// Caller is responsible for rejecting singular M beforehand.
inline Vec3 solve(const LinMap3& M, const Vec3& b) {
    std::array<std::array<double, 4>, 3> a{};
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) a[i][j] = M(i, j);
        a[i][3] = b[i];
    }
    for (std::size_t col = 0; col < 3; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < 3; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        std::swap(a[col], a[piv]);
        for (std::size_t r = col + 1; r < 3; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
        }
    }
    Vec3 x;
    for (std::size_t i = 3; i-- > 0;) {
        double s = a[i][3];
        for (std::size_t j = i + 1; j < 3; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

}  // namespace feynbody
