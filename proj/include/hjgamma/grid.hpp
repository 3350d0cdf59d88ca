#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace hjgamma {

/**
 * StateGrid: uniform 1-D discretization of the state space [lower, upper].
 *
 * node(i) = lower + i * spacing, with node(nodes-1) pinned to upper.
 * Distances are |x - y|.
 */
class StateGrid {
public:
    StateGrid(double lower, double upper, std::size_t nodes);

    double lower() const { return lower_; }
    double upper() const { return upper_; }
    std::size_t nodes() const { return nodes_; }
    double spacing() const { return spacing_; }

    double node(std::size_t i) const;
    std::vector<double> node_values() const;

    bool contains(double x) const { return x >= lower_ && x <= upper_; }
    double clamp(double x) const;

    // Index of the node closest to x (x clamped first).
    std::size_t nearest(double x) const;

    // Bracketing cell for x: x ~ (1-w) node(i) + w node(i+1). Clamps outside the grid.
    struct Bracket {
        std::size_t index;
        double weight;
        bool clamped;
    };
    Bracket bracket(double x) const;

    bool operator==(const StateGrid& other) const = default;

private:
    double lower_;
    double upper_;
    std::size_t nodes_;
    double spacing_;
};

/**
 * GridFunction: a real-valued function sampled on every node of a StateGrid.
 * Off-grid evaluation is piecewise linear with clamping at the boundary.
 */
class GridFunction {
public:
    GridFunction(StateGrid grid, std::vector<double> values);

    static GridFunction constant(const StateGrid& grid, double c);
    static GridFunction sample(const StateGrid& grid, const std::function<double(double)>& fn);

    const StateGrid& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }

    double min() const;
    double max() const;

    // Linear interpolation; exact at nodes. Throws ConfigError on NaN.
    double operator()(double x) const;

    struct Evaluation {
        double value;
        bool clamped;
    };
    Evaluation evaluate(double x) const;

    GridFunction operator+(const GridFunction& other) const;
    GridFunction operator-(const GridFunction& other) const;
    GridFunction operator+(double c) const;
    GridFunction operator*(double c) const;

private:
    StateGrid grid_;
    std::vector<double> values_;
};

double sup_norm(const GridFunction& f);
double interpolate(const GridFunction& f, double x);

struct Interval {
    double lo;
    double hi;

    bool contains(double x) const { return x >= lo && x <= hi; }
    bool operator==(const Interval&) const = default;
};

using IntervalUnion = std::vector<Interval>;

/**
 * CompactFamily: nested closed intervals K^0 ⊆ K^1 ⊆ ... inside the grid.
 * The index set is {0, ..., index_count-1} with its natural order.
 */
class CompactFamily {
public:
    CompactFamily(const StateGrid& grid, std::vector<Interval> intervals);

    // Intervals [center - r, center + r] clipped to the grid, one per radius (radii increasing).
    static CompactFamily nested(const StateGrid& grid, double center, std::span<const double> radii);

    std::size_t index_count() const { return intervals_.size(); }
    const Interval& interval(std::size_t q) const { return intervals_.at(q); }
    std::span<const Interval> intervals() const { return intervals_; }
    const StateGrid& grid() const { return grid_; }

    bool is_nested(std::size_t q1, std::size_t q2) const;

    // Smallest q whose interval contains [lo, hi], if any.
    std::optional<std::size_t> smallest_containing(double lo, double hi) const;

private:
    StateGrid grid_;
    std::vector<Interval> intervals_;
};

/**
 * SpaceSequence: member grids X_n with node embeddings into a reference grid X.
 * Only identity and refinement embeddings are modelled (coordinates are copied).
 */
class SpaceSequence {
public:
    SpaceSequence(std::vector<StateGrid> members, StateGrid reference);

    static SpaceSequence identity(const StateGrid& reference, std::size_t count);

    std::size_t size() const { return members_.size(); }
    const StateGrid& member(std::size_t n) const { return members_.at(n); }
    const StateGrid& reference() const { return reference_; }
    std::span<const double> embedding(std::size_t n) const { return embeddings_.at(n); }

    // For each member, the embedded image of its nodes inside member_compacts[n].interval(q)
    // lies inside compacts.interval(q).
    bool images_within(std::size_t q, std::span<const CompactFamily> member_compacts,
                       const CompactFamily& compacts) const;

    // Nodes of compacts.interval(q) are within one member spacing of the embedded image of
    // member_compacts[n].interval(q) for every n (liminf containment).
    bool liminf_covers(std::size_t q, std::span<const CompactFamily> member_compacts,
                       const CompactFamily& compacts) const;

private:
    std::vector<StateGrid> members_;
    StateGrid reference_;
    std::vector<std::vector<double>> embeddings_;
};

struct BucOptions {
    double tol = 1e-2;
    double tail_fraction = 1.0 / 3.0;
    // Bound for sup_n ||f_n||; defaults to 10 (1 + ||f||).
    std::optional<double> norm_bound;
};

struct BucReport {
    bool pass = false;
    bool bounded = false;
    bool converged = false;
    double norm_bound = 0.0;
    std::size_t tail_start = 0;
    std::vector<double> sup_norms;                // per n
    std::vector<std::vector<double>> deviations;  // [q][n] max over K^q of |f_n - f|
};

// Index of the first member of the tail of a sequence of the given length.
std::size_t tail_start(std::size_t length, double tail_fraction);

BucReport buc_lim_check(std::span<const GridFunction> fs, const GridFunction& f,
                        const CompactFamily& compacts, const BucOptions& options = {},
                        const SpaceSequence* embeddings = nullptr);

struct KuratowskiOptions {
    double tail_fraction = 1.0 / 3.0;
    double tol = 1e-9;
};

struct KuratowskiBounds {
    IntervalUnion liminf;
    IntervalUnion limsup;
};

KuratowskiBounds kuratowski_bounds(std::span<const IntervalUnion> sets, const StateGrid& grid,
                                   const KuratowskiOptions& options = {});

}  // namespace hjgamma
