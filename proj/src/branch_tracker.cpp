#include "moire/branch_tracker.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include <fmt/core.h>

#include "moire/spectral_theory.hpp"

namespace moire {

void Branch::update_extrema() {
    max_amplitude = 0.0;
    max_period = 0.0;
    angle_at_max_period = points.empty() ? 0.0 : points.front().alpha_deg;
    for (const auto& p : points) {
        max_amplitude = std::max(max_amplitude, p.measurement.amplitude);
        if (p.measurement.period > max_period) {
            max_period = p.measurement.period;
            angle_at_max_period = p.alpha_deg;
        }
    }
}

void LinkGates::validate() const {
    if (!(max_dphi_deg > 0.0) || !(max_dperiod > 0.0) || max_gap < 0) {
        throw Error("link gates must be positive (max_gap >= 0)");
    }
}

namespace {

// Canonical ordering of measurements, independent of list position.
bool canonical_less(const WaveMeasurement& a, const WaveMeasurement& b) {
    return std::tie(b.period, a.orientation_deg, b.amplitude, b.snr) <
           std::tie(a.period, b.orientation_deg, a.amplitude, a.snr);
}

struct Pair {
    double cost;
    double branch_period;
    int branch;
    std::size_t measurement;
};

}  // namespace

std::vector<Branch> link_branches(const std::vector<SweepStep>& sweep, const LinkGates& gates) {
    gates.validate();
    for (std::size_t s = 1; s < sweep.size(); ++s) {
        if (!(sweep[s].alpha_deg > sweep[s - 1].alpha_deg)) {
            throw Error("sweep must be sorted by strictly increasing alpha");
        }
    }

    std::vector<Branch> branches;
    for (std::size_t s = 0; s < sweep.size(); ++s) {
        const auto& ms = sweep[s].measurements;
        std::vector<std::size_t> order(ms.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return canonical_less(ms[a], ms[b]); });

        std::vector<Pair> pairs;
        for (int b = 0; b < static_cast<int>(branches.size()); ++b) {
            const BranchPoint& last = branches[b].points.back();
            const std::size_t gap = s - last.step;
            if (gap > static_cast<std::size_t>(gates.max_gap) + 1) {
                continue;
            }
            const double phi_gate = gates.max_dphi_deg * gap;
            const double period_gate = gates.max_dperiod * gap;
            for (std::size_t rank = 0; rank < order.size(); ++rank) {
                const WaveMeasurement& m = ms[order[rank]];
                const double dphi = orientation_distance(m.orientation_deg, last.measurement.orientation_deg);
                const double dper = std::abs(m.period - last.measurement.period) / last.measurement.period;
                if (dphi <= phi_gate && dper <= period_gate) {
                    // cost on the per-step gates, so a bridged gap is not cheaper than a direct step
                    const double cost = dphi / gates.max_dphi_deg + dper / gates.max_dperiod;
                    pairs.push_back({cost, last.measurement.period, b, rank});
                }
            }
        }
        std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
            return std::tie(a.cost, b.branch_period, a.branch, a.measurement) <
                   std::tie(b.cost, a.branch_period, b.branch, b.measurement);
        });

        std::vector<bool> branch_taken(branches.size(), false);
        std::vector<bool> measurement_taken(order.size(), false);
        for (const Pair& p : pairs) {
            if (branch_taken[p.branch] || measurement_taken[p.measurement]) {
                continue;
            }
            branch_taken[p.branch] = true;
            measurement_taken[p.measurement] = true;
            const std::size_t idx = order[p.measurement];
            branches[p.branch].points.push_back({sweep[s].alpha_deg, ms[idx], s, idx});
        }
        for (std::size_t rank = 0; rank < order.size(); ++rank) {
            if (measurement_taken[rank]) {
                continue;
            }
            Branch fresh;
            fresh.id = static_cast<int>(branches.size());
            const std::size_t idx = order[rank];
            fresh.points.push_back({sweep[s].alpha_deg, ms[idx], s, idx});
            branches.push_back(std::move(fresh));
        }
    }
    for (auto& b : branches) {
        b.update_extrema();
    }
    return branches;
}

std::vector<Branch> prune_branches(const std::vector<Branch>& branches, const PruneOptions& options) {
    double global_amp = 0.0;
    double global_period = 0.0;
    for (const auto& b : branches) {
        global_amp = std::max(global_amp, b.max_amplitude);
        global_period = std::max(global_period, b.max_period);
    }
    std::vector<Branch> kept;
    for (const auto& b : branches) {
        const bool enough_points = static_cast<long long>(b.points.size()) >= options.min_points;
        const bool strong = b.max_amplitude >= options.min_rel_amplitude * global_amp;
        const bool long_period = b.max_period >= options.min_rel_period * global_period;
        if (enough_points || strong || long_period) {
            kept.push_back(b);
        }
    }
    return kept;
}

BranchSummary branch_summary(const Branch& branch) {
    if (branch.points.empty()) {
        throw Error("branch_summary of an empty branch");
    }
    BranchSummary s;
    const BranchPoint* best = &branch.points.front();
    for (const auto& p : branch.points) {
        s.max_amplitude = std::max(s.max_amplitude, p.measurement.amplitude);
        if (p.measurement.period > best->measurement.period) {
            best = &p;
        }
    }
    s.max_period = best->measurement.period;
    s.angle_at_max_period = best->alpha_deg;
    s.orientation_at_max = best->measurement.orientation_deg;
    return s;
}

std::vector<double> local_period_maxima(const Branch& branch) {
    std::vector<double> out;
    const auto& pts = branch.points;
    std::size_t i = 1;
    while (i + 1 < pts.size()) {
        const double v = pts[i].measurement.period;
        if (v < pts[i - 1].measurement.period) {
            ++i;
            continue;
        }
        // extend over a plateau of equal values
        std::size_t j = i;
        while (j + 1 < pts.size() && pts[j + 1].measurement.period == v) {
            ++j;
        }
        if (j + 1 < pts.size() && pts[j + 1].measurement.period < v &&
            pts[i - 1].measurement.period < v) {
            out.push_back(pts[i].alpha_deg);
        }
        i = j + 1;
    }
    return out;
}

std::vector<double> wrapped_zero_crossings(const Branch& branch) {
    std::vector<double> out;
    const auto& pts = branch.points;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double w0 = wrapped_orientation(pts[i].measurement.orientation_deg, pts[i].alpha_deg);
        const double w1 = wrapped_orientation(pts[i + 1].measurement.orientation_deg, pts[i + 1].alpha_deg);
        if (std::abs(w1 - w0) >= 90.0) {
            continue;  // wrap jump
        }
        if (w0 == 0.0) {
            out.push_back(pts[i].alpha_deg);
        } else if (w0 * w1 < 0.0) {
            const double t = w0 / (w0 - w1);
            out.push_back(pts[i].alpha_deg + t * (pts[i + 1].alpha_deg - pts[i].alpha_deg));
        }
    }
    if (!pts.empty() && wrapped_orientation(pts.back().measurement.orientation_deg, pts.back().alpha_deg) == 0.0) {
        out.push_back(pts.back().alpha_deg);
    }
    return out;
}

namespace {

struct RationalAngle {
    int m;
    int n;
    double deg;
};

std::vector<RationalAngle> rational_angles(int max_order) {
    std::vector<RationalAngle> out;
    for (int m = 0; m <= max_order; ++m) {
        for (int n = 0; n <= max_order; ++n) {
            if ((m != 0 || n != 0) && std::gcd(m, n) == 1) {
                out.push_back({m, n, max_angle(m, n)});
            }
        }
    }
    return out;
}

}  // namespace

std::optional<std::string> rational_label(double angle_deg, int max_order, double tol_deg) {
    double a = std::abs(angle_deg);
    while (a > 90.0 + tol_deg) {
        a -= 90.0;
    }
    for (const auto& r : rational_angles(max_order)) {
        if (std::abs(a - r.deg) <= tol_deg) {
            if (r.m == 0) {
                return std::string("inf");
            }
            if (r.n == 0) {
                return std::string("0");
            }
            return r.m == 1 ? fmt::format("{}", r.n) : fmt::format("{}/{}", r.n, r.m);
        }
    }
    return std::nullopt;
}

double distance_to_rational(double angle_deg, int max_order) {
    double best = 180.0;
    for (const auto& r : rational_angles(max_order)) {
        for (double base : {r.deg, -r.deg}) {
            // distance on the 90-degree periodic lattice
            double d = std::fmod(std::abs(angle_deg - base), 90.0);
            best = std::min(best, std::min(d, 90.0 - d));
        }
    }
    return best;
}

}  // namespace moire
