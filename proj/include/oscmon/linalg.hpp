#pragma once

#include <array>
#include <cmath>

namespace oscmon {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    double norm() const { return std::hypot(x, y); }
};

struct Mat2 {
    // row-major: [[m00 m01], [m10 m11]]
    double m00 = 0.0, m01 = 0.0, m10 = 0.0, m11 = 0.0;

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    // rotation with the sign convention X <- X cos + P sin, P <- -X sin + P cos
    static Mat2 rotation(double angle) {
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        return {c, s, -s, c};
    }

    Mat2 operator*(const Mat2& o) const {
        return {m00 * o.m00 + m01 * o.m10, m00 * o.m01 + m01 * o.m11,
                m10 * o.m00 + m11 * o.m10, m10 * o.m01 + m11 * o.m11};
    }
    Vec2 operator*(const Vec2& v) const {
        return {m00 * v.x + m01 * v.y, m10 * v.x + m11 * v.y};
    }
    Mat2 operator*(double s) const { return {m00 * s, m01 * s, m10 * s, m11 * s}; }
    Mat2 operator+(const Mat2& o) const {
        return {m00 + o.m00, m01 + o.m01, m10 + o.m10, m11 + o.m11};
    }
    Mat2 operator-(const Mat2& o) const {
        return {m00 - o.m00, m01 - o.m01, m10 - o.m10, m11 - o.m11};
    }
    Mat2 transposed() const { return {m00, m10, m01, m11}; }
    double det() const { return m00 * m11 - m01 * m10; }

    Mat2 inverse() const {
        const double d = det();
        return {m11 / d, -m01 / d, -m10 / d, m00 / d};
    }
};

struct Mat4 {
    std::array<std::array<double, 4>, 4> m{};

    static Mat4 identity() {
        Mat4 r;
        for (int i = 0; i < 4; ++i) r.m[i][i] = 1.0;
        return r;
    }

    double& operator()(int i, int j) { return m[i][j]; }
    double operator()(int i, int j) const { return m[i][j]; }

    Mat4 operator*(const Mat4& o) const {
        Mat4 r;
        for (int i = 0; i < 4; ++i)
            for (int k = 0; k < 4; ++k) {
                const double a = m[i][k];
                for (int j = 0; j < 4; ++j) r.m[i][j] += a * o.m[k][j];
            }
        return r;
    }

    Mat4 transposed() const {
        Mat4 r;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) r.m[i][j] = m[j][i];
        return r;
    }
};

}  // namespace oscmon
