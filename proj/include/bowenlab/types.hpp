#pragma once

#include <Eigen/Dense>

namespace bowenlab {

// All shipped systems have ambient dimension <= 4, so vectors and matrices are
// stack-allocated with a fixed capacity of 4 and a runtime size.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 4, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 4, 4>;

inline Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

inline Vec vec3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
}

inline Vec vec4(double a, double b, double c, double d) {
    Vec v(4);
    v << a, b, c, d;
    return v;
}

inline Vec vec1(double a) {
    Vec v(1);
    v << a;
    return v;
}

} // namespace bowenlab
