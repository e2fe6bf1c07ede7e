#pragma once

#include <string>
#include <vector>

#include "narrowgap/neck/scalar.hpp"

namespace narrowgap {

/// A d-component vector of neck scalars. Component d-1 is the normal one.
class NeckField {
public:
    explicit NeckField(int dim = 2) : dim_(dim), c_(static_cast<size_t>(dim), NeckScalar(dim)) {}
    explicit NeckField(std::vector<NeckScalar> comps) : dim_(static_cast<int>(comps.size())), c_(std::move(comps)) {
        if (dim_ != 2 && dim_ != 3) throw InvalidArgument("neck field must have 2 or 3 components");
        for (const auto& s : c_)
            if (s.dim() != dim_) throw DimensionMismatch("component dimension differs from component count");
    }

    int dim() const { return dim_; }
    const NeckScalar& operator[](int i) const { return c_.at(static_cast<size_t>(i)); }
    NeckScalar& operator[](int i) { return c_.at(static_cast<size_t>(i)); }
    const NeckScalar& normal() const { return c_.back(); }

    NeckField& operator+=(const NeckField& b) {
        check(b);
        for (int i = 0; i < dim_; ++i) (*this)[i] += b[i];
        return *this;
    }
    NeckField& operator-=(const NeckField& b) {
        check(b);
        for (int i = 0; i < dim_; ++i) (*this)[i] -= b[i];
        return *this;
    }
    friend NeckField operator+(NeckField a, const NeckField& b) { return a += b; }
    friend NeckField operator-(NeckField a, const NeckField& b) { return a -= b; }
    NeckField scaled(const RationalCoeff& c) const {
        NeckField r(dim_);
        for (int i = 0; i < dim_; ++i) r[i] = (*this)[i].scaled(c);
        return r;
    }

    NeckField subst_boundary(int side) const {
        NeckField r(dim_);
        for (int i = 0; i < dim_; ++i) r[i] = (*this)[i].subst_boundary(side);
        return r;
    }

    bool is_zero() const {
        for (const auto& s : c_)
            if (!s.is_zero()) return false;
        return true;
    }
    size_t term_count() const {
        size_t n = 0;
        for (const auto& s : c_) n += s.size();
        return n;
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& s : c_) arr.push_back(s.to_json());
        return arr;
    }

private:
    void check(const NeckField& b) const {
        if (b.dim_ != dim_) throw DimensionMismatch("neck fields of different dimension");
    }

    int dim_;
    std::vector<NeckScalar> c_;
};

inline bool s_equal(const NeckField& a, const NeckField& b) {
    if (a.dim() != b.dim()) throw DimensionMismatch("neck fields of different dimension");
    for (int i = 0; i < a.dim(); ++i)
        if (!s_equal(a[i], b[i])) return false;
    return true;
}

/// Index of the axis for component / tangential direction i.
inline Axis tangential_axis(int i) { return i == 0 ? Axis::x1 : Axis::x2; }

} // namespace narrowgap
