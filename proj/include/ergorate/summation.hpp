#pragma once

#include <cmath>
#include <complex>

namespace ergorate {

// Neumaier's variant of Kahan summation; robust when addends exceed the sum.
class CompensatedSum {
public:
    CompensatedSum() = default;
    explicit CompensatedSum(double init) : sum_(init) {}

    void add(double x) {
        double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }

    CompensatedSum& operator+=(double x) {
        add(x);
        return *this;
    }

    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

class CompensatedComplexSum {
public:
    void add(std::complex<double> z) {
        re_.add(z.real());
        im_.add(z.imag());
    }
    CompensatedComplexSum& operator+=(std::complex<double> z) {
        add(z);
        return *this;
    }
    std::complex<double> value() const { return {re_.value(), im_.value()}; }

private:
    CompensatedSum re_;
    CompensatedSum im_;
};

// Error-free product: a*b == hi + lo exactly.
inline void two_product(double a, double b, double& hi, double& lo) {
    hi = a * b;
    lo = std::fma(a, b, -hi);
}

// Fractional part in [0, 1).
inline double frac(double x) {
    double f = x - std::floor(x);
    return f >= 1.0 ? 0.0 : f;
}

// Reduce turns to [-1/2, 1/2).
inline double wrap_turns(double x) {
    double f = x - std::floor(x + 0.5);
    return f >= 0.5 ? f - 1.0 : f;
}

}  // namespace ergorate
