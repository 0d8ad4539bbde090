#pragma once

// Micro-to-macro aggregation: agent-level variables and pairwise transaction
// records are binned onto cells of the risk domain. Per-cell sums stand in for
// the averaging over the agents' distribution function.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "espace/error.hpp"
#include "espace/parallel.hpp"
#include "espace/summation.hpp"

namespace espace {

struct EParticle {
    double x = 0.0;
    double v = 0.0;
    std::vector<double> vars;
};

struct TransactionEvent {
    double x = 0.0;  // creditor coordinate
    double y = 0.0;  // borrower coordinate
    double amount = 0.0;
    double v_creditor = 0.0;
    double v_borrower = 0.0;

    bool operator==(const TransactionEvent&) const = default;
};

/// Cell index on [0, X] split into n cells. Interior edges belong to the
/// higher cell and x = X to the last one.
inline std::size_t cell_index(double x, double X, std::size_t n) {
    if (!(x >= 0.0 && x <= X))
        throw Error(Errc::out_of_domain, "coordinate " + std::to_string(x) + " outside [0, X]");
    const auto i = static_cast<std::size_t>(std::floor(x * static_cast<double>(n) / X));
    return std::min(i, n - 1);
}

/// Impulse over density, or nullopt when the density is within eps of zero.
inline std::optional<double> field_velocity(double density, double impulse, double eps_den = 0.0) noexcept {
    if (!(std::abs(density) > eps_den)) return std::nullopt;
    return impulse / density;
}

struct VariableAggregate {
    std::vector<double> U;  // sum of u over particles in the cell
    std::vector<double> P;  // sum of u * v
};

inline VariableAggregate aggregate_variables(std::span<const EParticle> particles, std::size_t var_index,
                                             std::size_t n_cells, double X) {
    if (n_cells < 1) throw Error(Errc::bad_resolution, "n_cells must be >= 1");
    std::vector<CompensatedSum> U(n_cells), P(n_cells);
    for (const auto& e : particles) {
        const std::size_t i = cell_index(e.x, X, n_cells);
        const double u = e.vars.at(var_index);
        U[i] += u;
        P[i] += u * e.v;
    }
    VariableAggregate out;
    out.U.reserve(n_cells);
    out.P.reserve(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i) {
        out.U.push_back(U[i].value());
        out.P.push_back(P[i].value());
    }
    return out;
}

/// Transaction field on an n x n cell grid over [0, X]^2, x = creditor axis.
/// `value` is a density (cell sum / cell area); velocities are NaN where
/// undefined.
class FieldGrid {
public:
    FieldGrid() = default;
    FieldGrid(std::size_t n_x, std::size_t n_y, double X)
        : n_x_(n_x), n_y_(n_y), X_(X), amount_(n_x * n_y), imp_x_(n_x * n_y), imp_y_(n_x * n_y) {
        if (n_x < 1 || n_y < 1) throw Error(Errc::bad_resolution, "grid needs at least one cell per axis");
        if (!(X > 0.0)) throw Error(Errc::non_positive_scale, "X must be > 0");
    }

    std::size_t n_x() const noexcept { return n_x_; }
    std::size_t n_y() const noexcept { return n_y_; }
    double X() const noexcept { return X_; }
    double cell_size_x() const noexcept { return X_ / static_cast<double>(n_x_); }
    double cell_size_y() const noexcept { return X_ / static_cast<double>(n_y_); }
    double cell_area() const noexcept { return cell_size_x() * cell_size_y(); }

    void add(const TransactionEvent& e) {
        if (!(e.amount >= 0.0)) throw Error(Errc::out_of_domain, "transaction amount must be >= 0");
        const std::size_t k = index(cell_index(e.x, X_, n_x_), cell_index(e.y, X_, n_y_));
        amount_[k] += e.amount;
        imp_x_[k] += e.amount * e.v_creditor;
        imp_y_[k] += e.amount * e.v_borrower;
    }

    /// Cellwise addition of partial grids; associative and commutative.
    FieldGrid& operator+=(const FieldGrid& o) {
        if (o.n_x_ != n_x_ || o.n_y_ != n_y_ || o.X_ != X_)
            throw Error(Errc::bad_resolution, "cannot merge grids of different shape");
        for (std::size_t k = 0; k < amount_.size(); ++k) {
            amount_[k] += o.amount_[k];
            imp_x_[k] += o.imp_x_[k];
            imp_y_[k] += o.imp_y_[k];
        }
        return *this;
    }

    double cell_total(std::size_t i, std::size_t j) const { return amount_[index(i, j)].value(); }
    double impulse_x(std::size_t i, std::size_t j) const { return imp_x_[index(i, j)].value(); }
    double impulse_y(std::size_t i, std::size_t j) const { return imp_y_[index(i, j)].value(); }
    double value(std::size_t i, std::size_t j) const { return cell_total(i, j) / cell_area(); }

    double grand_total() const {
        CompensatedSum s;
        for (const auto& a : amount_) s += a;
        return s.value();
    }

    /// 1e-12 * (grand total / cell count).
    double eps_den() const { return 1e-12 * std::abs(grand_total()) / static_cast<double>(amount_.size()); }

    double vel_x(std::size_t i, std::size_t j) const {
        return field_velocity(cell_total(i, j), impulse_x(i, j), eps_den())
            .value_or(std::numeric_limits<double>::quiet_NaN());
    }
    double vel_y(std::size_t i, std::size_t j) const {
        return field_velocity(cell_total(i, j), impulse_y(i, j), eps_den())
            .value_or(std::numeric_limits<double>::quiet_NaN());
    }

private:
    std::size_t index(std::size_t i, std::size_t j) const noexcept { return j * n_x_ + i; }

    std::size_t n_x_ = 0;
    std::size_t n_y_ = 0;
    double X_ = 1.0;
    std::vector<CompensatedSum> amount_;
    std::vector<CompensatedSum> imp_x_;
    std::vector<CompensatedSum> imp_y_;
};

/// Events per partial grid. The split depends only on the event count, so
/// the merged result is bit-identical for any number of workers.
inline constexpr std::size_t kAggregateChunk = 8192;
inline constexpr std::size_t kAggregateMaxChunks = 64;

/// Bins events onto an n_cells x n_cells grid. Events are split into
/// contiguous chunks whose partial grids are merged in chunk order.
inline FieldGrid aggregate_transactions(std::span<const TransactionEvent> events, std::size_t n_cells, double X,
                                        unsigned workers = 1) {
    if (n_cells < 1) throw Error(Errc::bad_resolution, "n_cells must be >= 1");
    const std::size_t chunks =
        std::clamp<std::size_t>((events.size() + kAggregateChunk - 1) / kAggregateChunk, 1, kAggregateMaxChunks);
    if (chunks == 1) {
        FieldGrid g(n_cells, n_cells, X);
        for (const auto& e : events) g.add(e);
        return g;
    }
    const std::size_t per = (events.size() + chunks - 1) / chunks;
    std::vector<FieldGrid> partial(chunks, FieldGrid(n_cells, n_cells, X));
    parallel_for(0, chunks, workers, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t c = lo; c < hi; ++c) {
            const std::size_t first = c * per;
            const std::size_t last = std::min(events.size(), first + per);
            for (std::size_t i = first; i < last; ++i) partial[c].add(events[i]);
        }
    });
    for (std::size_t c = 1; c < chunks; ++c) partial[0] += partial[c];
    return std::move(partial[0]);
}

/// Credits allocated from each x-cell: sum over y of value * cell area.
inline std::vector<double> marginal_out(const FieldGrid& g) {
    std::vector<double> out(g.n_x());
    for (std::size_t i = 0; i < g.n_x(); ++i) {
        CompensatedSum s;
        for (std::size_t j = 0; j < g.n_y(); ++j) s += g.value(i, j) * g.cell_area();
        out[i] = s.value();
    }
    return out;
}

/// Loans received by each y-cell.
inline std::vector<double> marginal_in(const FieldGrid& g) {
    std::vector<double> out(g.n_y());
    for (std::size_t j = 0; j < g.n_y(); ++j) {
        CompensatedSum s;
        for (std::size_t i = 0; i < g.n_x(); ++i) s += g.value(i, j) * g.cell_area();
        out[j] = s.value();
    }
    return out;
}

}  // namespace espace
