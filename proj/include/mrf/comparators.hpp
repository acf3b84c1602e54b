#ifndef MRF_COMPARATORS_HPP
#define MRF_COMPARATORS_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "mrf/common.hpp"
#include "mrf/monotone.hpp"

namespace mrf {

// A scalar comparison function backed either by a builtin closure or by a
// monotone table. Table-backed comparators are range-checked: evaluating
// outside the table coverage raises RangeError rather than extrapolating.
class Comparator {
  public:
    Comparator() = default;

    static Comparator from_closure(std::string name, std::function<double(double)> f,
                                   bool strictly_increasing) {
        Comparator c;
        c.name_ = std::move(name);
        c.fn_ = std::move(f);
        c.strict_ = strictly_increasing;
        return c;
    }

    static Comparator from_table(std::string name, MonotoneTable t) {
        Comparator c;
        c.name_ = std::move(name);
        c.strict_ = t.strictly_increasing();
        c.table_ = std::move(t);
        return c;
    }

    double operator()(double v) const {
        if (table_) {
            const double slack = 1e-12 * std::max(1.0, std::abs(table_->x_max()));
            if (v < table_->x_min() - slack || v > table_->x_max() + slack)
                throw RangeError("comparator '" + name_ + "': argument " + fmt_g6(v) +
                                 " outside table range");
            return (*table_)(v);
        }
        return fn_(v);
    }

    const std::string& name() const { return name_; }
    bool strictly_increasing() const { return strict_; }
    bool table_backed() const { return table_.has_value(); }

    Comparator scaled(double c) const {
        Comparator out = *this;
        if (out.table_) {
            std::vector<double> ys = out.table_->ys();
            for (double& y : ys) y *= c;
            out.table_ = MonotoneTable(out.table_->xs(), ys);
        } else {
            auto f = fn_;
            out.fn_ = [f, c](double v) { return c * f(v); };
        }
        out.name_ = name_ + "*" + fmt_g6(c);
        return out;
    }

  private:
    std::string name_;
    std::function<double(double)> fn_;
    std::optional<MonotoneTable> table_;
    bool strict_ = false;
};

// p0 in [0,1] increasing; gamma positive, expected strictly increasing (a
// constant gamma is accepted with a warning downstream).
struct ComparatorPair {
    Comparator p0;
    Comparator gamma;
};

inline Comparator make_p0(const std::string& name) {
    if (name == "one")
        return Comparator::from_closure("one", [](double) { return 1.0; }, false);
    if (name == "sqrt_cap")
        return Comparator::from_closure("sqrt_cap",
                                        [](double v) { return std::min(1.0, std::sqrt(std::max(v, 0.0))); },
                                        false);
    if (name == "lin_cap")
        return Comparator::from_closure("lin_cap", [](double v) { return std::min(1.0, std::max(v, 0.0)); },
                                        false);
    throw ConfigError("unknown p0 comparator: " + name);
}

inline Comparator make_gamma(const std::string& name) {
    if (name == "rational")
        return Comparator::from_closure("rational", [](double v) { return v / (1.0 + v); }, true);
    if (name == "identity")
        return Comparator::from_closure("identity", [](double v) { return v; }, true);
    if (name == "sqrt")
        return Comparator::from_closure("sqrt", [](double v) { return std::sqrt(std::max(v, 0.0)); }, true);
    if (name.rfind("const:", 0) == 0) {
        const double c = std::stod(name.substr(6));
        if (!(c > 0.0)) throw ConfigError("const gamma must be positive");
        return Comparator::from_closure(name, [c](double) { return c; }, false);
    }
    throw ConfigError("unknown gamma comparator: " + name);
}

}  // namespace mrf

#endif
