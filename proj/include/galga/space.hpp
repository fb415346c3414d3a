#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "galga/error.hpp"
#include "galga/types.hpp"

namespace galga {

struct Variable {
    std::string name;
    double min = 0.0;
    double max = 1.0;
};

/// Names and ranges of the D input variables. Owns the affine map between
/// physical coordinates and the unit hypercube that all geometry works in.
class InputSpace {
public:
    InputSpace() = default;

    explicit InputSpace(std::vector<Variable> vars) : vars_(std::move(vars))
    {
        if (vars_.empty()) throw InvalidArgument("InputSpace: at least one variable required");
        for (const auto& v : vars_) {
            if (!std::isfinite(v.min) || !std::isfinite(v.max) || !(v.max > v.min))
                throw InvalidArgument("InputSpace: variable '" + v.name + "' needs finite min < max");
        }
    }

    /// [0,1]^D with variables named x0, x1, ...
    static InputSpace unit(std::size_t dim)
    {
        std::vector<Variable> v;
        for (std::size_t d = 0; d < dim; ++d) v.push_back({"x" + std::to_string(d), 0.0, 1.0});
        return InputSpace(std::move(v));
    }

    std::size_t dim() const noexcept { return vars_.size(); }
    const std::vector<Variable>& variables() const noexcept { return vars_; }
    const Variable& operator[](std::size_t d) const { return vars_.at(d); }

    /// Index of the variable called `name`, or dim() if absent.
    std::size_t find(const std::string& name) const noexcept
    {
        for (std::size_t d = 0; d < vars_.size(); ++d)
            if (vars_[d].name == name) return d;
        return vars_.size();
    }

    template <typename Derived>
    Vector normalize(const Eigen::MatrixBase<Derived>& x) const
    {
        check(static_cast<std::size_t>(x.size()));
        Vector u(x.size());
        for (Eigen::Index d = 0; d < x.size(); ++d)
            u[d] = (x[d] - vars_[d].min) / (vars_[d].max - vars_[d].min);
        return u;
    }

    template <typename Derived>
    Vector scale(const Eigen::MatrixBase<Derived>& u) const
    {
        check(static_cast<std::size_t>(u.size()));
        Vector x(u.size());
        for (Eigen::Index d = 0; d < u.size(); ++d)
            x[d] = vars_[d].min + u[d] * (vars_[d].max - vars_[d].min);
        return x;
    }

    Matrix normalize_rows(const Matrix& x) const
    {
        Matrix u(x.rows(), x.cols());
        for (Eigen::Index i = 0; i < x.rows(); ++i) u.row(i) = normalize(x.row(i).transpose()).transpose();
        return u;
    }

    Matrix scale_rows(const Matrix& u) const
    {
        Matrix x(u.rows(), u.cols());
        for (Eigen::Index i = 0; i < u.rows(); ++i) x.row(i) = scale(u.row(i).transpose()).transpose();
        return x;
    }

    friend bool operator==(const InputSpace& a, const InputSpace& b)
    {
        if (a.vars_.size() != b.vars_.size()) return false;
        for (std::size_t d = 0; d < a.vars_.size(); ++d) {
            const auto& p = a.vars_[d];
            const auto& q = b.vars_[d];
            if (p.name != q.name || p.min != q.min || p.max != q.max) return false;
        }
        return true;
    }

private:
    void check(std::size_t n) const
    {
        if (n != vars_.size())
            throw DimensionMismatch("InputSpace: expected " + std::to_string(vars_.size()) +
                                    " coordinates, got " + std::to_string(n));
    }

    std::vector<Variable> vars_;
};

}  // namespace galga
