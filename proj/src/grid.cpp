#include "hjgamma/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hjgamma/errors.hpp"

namespace hjgamma {

StateGrid::StateGrid(double lower, double upper, std::size_t nodes)
    : lower_(lower), upper_(upper), nodes_(nodes), spacing_(0.0) {
    if (!std::isfinite(lower) || !std::isfinite(upper) || !(lower < upper)) {
        throw ConfigError("StateGrid requires finite lower < upper");
    }
    if (nodes < 3) {
        throw ConfigError("StateGrid requires nodes >= 3 (got " + std::to_string(nodes) + ")");
    }
    spacing_ = (upper - lower) / static_cast<double>(nodes - 1);
}

double StateGrid::node(std::size_t i) const {
    if (i + 1 == nodes_) return upper_;
    return lower_ + static_cast<double>(i) * spacing_;
}

std::vector<double> StateGrid::node_values() const {
    std::vector<double> xs(nodes_);
    for (std::size_t i = 0; i < nodes_; ++i) xs[i] = node(i);
    return xs;
}

double StateGrid::clamp(double x) const { return std::clamp(x, lower_, upper_); }

std::size_t StateGrid::nearest(double x) const {
    const double s = (clamp(x) - lower_) / spacing_;
    const auto i = static_cast<std::size_t>(std::lround(s));
    return std::min(i, nodes_ - 1);
}

StateGrid::Bracket StateGrid::bracket(double x) const {
    if (std::isnan(x)) throw ConfigError("cannot locate NaN on a StateGrid");
    if (x <= lower_) return {0, 0.0, x < lower_};
    if (x >= upper_) return {nodes_ - 2, 1.0, x > upper_};
    const double s = (x - lower_) / spacing_;
    auto i = static_cast<std::size_t>(std::floor(s));
    if (i >= nodes_ - 1) i = nodes_ - 2;
    double w = s - static_cast<double>(i);
    // Snap round-off so that node coordinates evaluate exactly.
    if (w < 1e-12) w = 0.0;
    if (w > 1.0 - 1e-12) w = 1.0;
    return {i, w, false};
}

GridFunction::GridFunction(StateGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.nodes()) {
        throw ConfigError("GridFunction size " + std::to_string(values_.size()) +
                          " does not match grid nodes " + std::to_string(grid_.nodes()));
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw ConfigError("GridFunction values must be finite");
    }
}

GridFunction GridFunction::constant(const StateGrid& grid, double c) {
    return GridFunction(grid, std::vector<double>(grid.nodes(), c));
}

GridFunction GridFunction::sample(const StateGrid& grid, const std::function<double(double)>& fn) {
    std::vector<double> v(grid.nodes());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid.node(i));
    return GridFunction(grid, std::move(v));
}

double GridFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }
double GridFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }

GridFunction::Evaluation GridFunction::evaluate(double x) const {
    const auto b = grid_.bracket(x);
    const double lo = values_[b.index];
    const double hi = values_[b.index + 1];
    if (b.weight == 0.0) return {lo, b.clamped};
    if (b.weight == 1.0) return {hi, b.clamped};
    return {lo + b.weight * (hi - lo), b.clamped};
}

double GridFunction::operator()(double x) const { return evaluate(x).value; }

GridFunction GridFunction::operator+(const GridFunction& other) const {
    if (!(grid_ == other.grid_)) throw ConfigError("GridFunction grids differ");
    std::vector<double> v(values_);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += other.values_[i];
    return GridFunction(grid_, std::move(v));
}

GridFunction GridFunction::operator-(const GridFunction& other) const {
    if (!(grid_ == other.grid_)) throw ConfigError("GridFunction grids differ");
    std::vector<double> v(values_);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= other.values_[i];
    return GridFunction(grid_, std::move(v));
}

GridFunction GridFunction::operator+(double c) const {
    std::vector<double> v(values_);
    for (double& x : v) x += c;
    return GridFunction(grid_, std::move(v));
}

GridFunction GridFunction::operator*(double c) const {
    std::vector<double> v(values_);
    for (double& x : v) x *= c;
    return GridFunction(grid_, std::move(v));
}

double sup_norm(const GridFunction& f) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

double interpolate(const GridFunction& f, double x) { return f(x); }

// ---------------------------------------------------------------------------
// Compact families
// ---------------------------------------------------------------------------

CompactFamily::CompactFamily(const StateGrid& grid, std::vector<Interval> intervals)
    : grid_(grid), intervals_(std::move(intervals)) {
    if (intervals_.empty()) throw ConfigError("CompactFamily needs at least one interval");
    const double eps = 1e-12 * (grid.upper() - grid.lower());
    for (const auto& iv : intervals_) {
        if (!(iv.lo <= iv.hi)) throw ConfigError("CompactFamily interval has lo > hi");
        if (iv.lo < grid.lower() - eps || iv.hi > grid.upper() + eps) {
            throw ConfigError("CompactFamily interval leaves the grid");
        }
    }
    for (std::size_t q = 1; q < intervals_.size(); ++q) {
        if (!is_nested(q - 1, q)) {
            throw ConfigError("CompactFamily intervals are not nested at index " + std::to_string(q));
        }
    }
}

CompactFamily CompactFamily::nested(const StateGrid& grid, double center, std::span<const double> radii) {
    std::vector<Interval> ivs;
    ivs.reserve(radii.size());
    for (double r : radii) ivs.push_back({grid.clamp(center - r), grid.clamp(center + r)});
    return CompactFamily(grid, std::move(ivs));
}

bool CompactFamily::is_nested(std::size_t q1, std::size_t q2) const {
    if (q1 > q2) return is_nested(q2, q1);
    const auto& a = intervals_.at(q1);
    const auto& b = intervals_.at(q2);
    return b.lo <= a.lo && a.hi <= b.hi;
}

std::optional<std::size_t> CompactFamily::smallest_containing(double lo, double hi) const {
    for (std::size_t q = 0; q < intervals_.size(); ++q) {
        if (intervals_[q].lo <= lo && hi <= intervals_[q].hi) return q;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Space sequences
// ---------------------------------------------------------------------------

SpaceSequence::SpaceSequence(std::vector<StateGrid> members, StateGrid reference)
    : members_(std::move(members)), reference_(reference) {
    embeddings_.reserve(members_.size());
    for (const auto& g : members_) {
        auto xs = g.node_values();
        for (double x : xs) {
            if (!reference_.contains(x)) {
                throw ConfigError("embedded node lies outside the reference grid");
            }
        }
        embeddings_.push_back(std::move(xs));
    }
}

SpaceSequence SpaceSequence::identity(const StateGrid& reference, std::size_t count) {
    return SpaceSequence(std::vector<StateGrid>(count, reference), reference);
}

bool SpaceSequence::images_within(std::size_t q, std::span<const CompactFamily> member_compacts,
                                  const CompactFamily& compacts) const {
    if (member_compacts.size() != members_.size()) {
        throw ConfigError("one compact family per member required");
    }
    const auto& target = compacts.interval(q);
    for (std::size_t n = 0; n < members_.size(); ++n) {
        const auto& k = member_compacts[n].interval(q);
        for (double x : embeddings_[n]) {
            if (k.contains(x) && !target.contains(x)) return false;
        }
    }
    return true;
}

bool SpaceSequence::liminf_covers(std::size_t q, std::span<const CompactFamily> member_compacts,
                                  const CompactFamily& compacts) const {
    if (member_compacts.size() != members_.size()) {
        throw ConfigError("one compact family per member required");
    }
    const auto& target = compacts.interval(q);
    const std::size_t start = tail_start(members_.size(), 1.0 / 3.0);
    for (std::size_t i = 0; i < reference_.nodes(); ++i) {
        const double x = reference_.node(i);
        if (!target.contains(x)) continue;
        for (std::size_t n = start; n < members_.size(); ++n) {
            const auto& k = member_compacts[n].interval(q);
            double best = std::numeric_limits<double>::infinity();
            for (double e : embeddings_[n]) {
                if (k.contains(e)) best = std::min(best, std::abs(e - x));
            }
            if (best > members_[n].spacing() + 1e-12) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// buc convergence
// ---------------------------------------------------------------------------

std::size_t tail_start(std::size_t length, double tail_fraction) {
    if (length == 0) return 0;
    const double frac = std::clamp(tail_fraction, 0.0, 1.0);
    auto count = static_cast<std::size_t>(std::ceil(frac * static_cast<double>(length)));
    count = std::clamp<std::size_t>(count, 1, length);
    return length - count;
}

BucReport buc_lim_check(std::span<const GridFunction> fs, const GridFunction& f,
                        const CompactFamily& compacts, const BucOptions& options,
                        const SpaceSequence* embeddings) {
    if (!(options.tol > 0.0)) throw ConfigError("buc_lim_check requires tol > 0");
    if (fs.empty()) throw ConfigError("buc_lim_check requires a non-empty sequence");
    if (embeddings != nullptr && embeddings->size() != fs.size()) {
        throw ConfigError("embedding count does not match sequence length");
    }
    for (std::size_t n = 0; n < fs.size(); ++n) {
        const bool same = fs[n].grid() == f.grid();
        if (!same && embeddings == nullptr) {
            throw ConfigError("buc_lim_check: member " + std::to_string(n) +
                              " lives on a different grid and no embedding was supplied");
        }
        if (embeddings != nullptr && !(embeddings->member(n) == fs[n].grid())) {
            throw ConfigError("buc_lim_check: embedding grid does not match member grid");
        }
    }

    BucReport report;
    report.norm_bound = options.norm_bound.value_or(10.0 * (1.0 + sup_norm(f)));
    report.tail_start = tail_start(fs.size(), options.tail_fraction);
    report.sup_norms.reserve(fs.size());
    double sup_over_n = 0.0;
    for (const auto& fn : fs) {
        report.sup_norms.push_back(sup_norm(fn));
        sup_over_n = std::max(sup_over_n, report.sup_norms.back());
    }
    report.bounded = sup_over_n <= report.norm_bound;

    report.deviations.assign(compacts.index_count(), std::vector<double>(fs.size(), 0.0));
    report.converged = true;
    for (std::size_t q = 0; q < compacts.index_count(); ++q) {
        const auto& k = compacts.interval(q);
        for (std::size_t n = 0; n < fs.size(); ++n) {
            const auto& fn = fs[n];
            double dev = 0.0;
            for (std::size_t i = 0; i < fn.size(); ++i) {
                const double x = embeddings ? embeddings->embedding(n)[i] : fn.grid().node(i);
                if (!k.contains(x)) continue;
                dev = std::max(dev, std::abs(fn[i] - f(x)));
            }
            report.deviations[q][n] = dev;
            if (n >= report.tail_start && !(dev < options.tol)) report.converged = false;
        }
    }
    report.pass = report.bounded && report.converged;
    return report;
}

// ---------------------------------------------------------------------------
// Kuratowski limits
// ---------------------------------------------------------------------------

namespace {

double distance_to(const IntervalUnion& set, double x) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& iv : set) {
        if (iv.contains(x)) return 0.0;
        d = std::min(d, x < iv.lo ? iv.lo - x : x - iv.hi);
    }
    return d;
}

IntervalUnion runs_to_intervals(const StateGrid& grid, const std::vector<bool>& member) {
    IntervalUnion out;
    std::size_t i = 0;
    while (i < member.size()) {
        if (!member[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < member.size() && member[j + 1]) ++j;
        out.push_back({grid.node(i), grid.node(j)});
        i = j + 1;
    }
    return out;
}

}  // namespace

KuratowskiBounds kuratowski_bounds(std::span<const IntervalUnion> sets, const StateGrid& grid,
                                   const KuratowskiOptions& options) {
    if (sets.empty()) throw ConfigError("kuratowski_bounds requires a non-empty sequence");
    std::size_t start = tail_start(sets.size(), options.tail_fraction);
    // A single-member tail cannot distinguish "infinitely often" from "eventually".
    if (sets.size() - start < 2 && sets.size() >= 2) start = sets.size() - 2;

    std::vector<bool> in_inf(grid.nodes()), in_sup(grid.nodes());
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
        const double x = grid.node(i);
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (std::size_t n = start; n < sets.size(); ++n) {
            const double d = distance_to(sets[n], x);
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        in_sup[i] = lo <= options.tol;
        in_inf[i] = hi <= options.tol;
    }
    return {runs_to_intervals(grid, in_inf), runs_to_intervals(grid, in_sup)};
}

}  // namespace hjgamma
