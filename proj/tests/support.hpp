#pragma once

#include "homlab/core.hpp"

#include <random>

namespace testsupport {

using homlab::Mat;
using homlab::Vec;

inline Mat random_symmetric(int n, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g;
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = g(rng);
    return scale * 0.5 * (m + m.transpose());
}

inline Mat random_banded(int n, int kd, std::mt19937_64& rng) {
    Mat m = random_symmetric(n, rng);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (std::abs(i - j) > kd) m(i, j) = 0.0;
    return m;
}

inline Vec random_vec(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = g(rng);
    return v;
}

inline Vec dense_eigenvalues(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

}  // namespace testsupport
