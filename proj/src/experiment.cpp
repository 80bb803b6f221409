#include "moire/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>
#include <tuple>

#include <fmt/core.h>

#include "moire/renderer.hpp"

namespace moire {

namespace {

double round_angle(double a) { return std::round(a * 1e9) / 1e9; }

// Reflections and 90-degree shifts of the rational angles, within [lo, hi].
std::vector<double> rational_centres(int max_order, double lo, double hi) {
    std::vector<double> out;
    const int k_lo = static_cast<int>(std::floor(lo / 90.0)) - 1;
    const int k_hi = static_cast<int>(std::ceil(hi / 90.0)) + 1;
    for (double r : enumerate_moire_angles(max_order)) {
        for (int k = k_lo; k <= k_hi; ++k) {
            for (double c : {r + 90.0 * k, -r + 90.0 * k}) {
                if (c >= lo && c <= hi) {
                    out.push_back(round_angle(c));
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Map a wavevector to the half plane used for orientations in (-90, 90].
Complex half_plane(Complex z) {
    const double phi = rad2deg(std::arg(z));
    return (phi > 90.0 || phi <= -90.0) ? -z : z;
}

Complex measured_wavevector(const WaveMeasurement& w) {
    return std::polar(w.wavenumber, deg2rad(w.orientation_deg));
}

double relative_distance(const WaveMeasurement& w, const PredictedPeak& p) {
    if (!(p.wavenumber > 0.0)) {
        return std::numeric_limits<double>::infinity();
    }
    return std::abs(measured_wavevector(w) - half_plane(p.wavevector)) / p.wavenumber;
}

constexpr double kMatchTolerance = 0.10;

}  // namespace

void SweepPlan::validate() const {
    if (!(alpha_end > alpha_start)) {
        throw Error("sweep range must be non-empty (alpha_end > alpha_start)");
    }
    if (!(coarse_step > 0.0) || !(fine_step > 0.0) || !(fine_step < coarse_step)) {
        throw Error("sweep steps must satisfy 0 < fine_step < coarse_step");
    }
    if (refine_radius < 0.0 || rational_max_order < 1) {
        throw Error("refine_radius must be >= 0 and rational_max_order >= 1");
    }
}

std::vector<double> SweepPlan::grid() const {
    validate();
    std::vector<double> g;
    const double eps = 1e-9;
    for (long i = 0;; ++i) {
        const double a = round_angle(alpha_start + i * coarse_step);
        if (a > alpha_end + eps) {
            break;
        }
        g.push_back(a);
    }
    for (double c : rational_centres(rational_max_order, alpha_start - refine_radius, alpha_end + refine_radius)) {
        const long k0 = static_cast<long>(std::ceil((c - refine_radius) / fine_step - eps));
        const long k1 = static_cast<long>(std::floor((c + refine_radius) / fine_step + eps));
        for (long k = k0; k <= k1; ++k) {
            const double a = round_angle(k * fine_step);
            if (a >= alpha_start - eps && a <= alpha_end + eps) {
                g.push_back(a);
            }
        }
    }
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end(), [](double a, double b) { return std::abs(a - b) < 1e-7; }), g.end());
    return g;
}

bool SweepPlan::contains(double alpha_deg) const {
    const auto g = grid();
    return std::any_of(g.begin(), g.end(), [&](double a) { return std::abs(a - alpha_deg) < 1e-7; });
}

AngleError::AngleError(double alpha_deg, const std::string& what)
    : Error(fmt::format("at alpha = {} deg: {}", alpha_deg, what)), alpha_(alpha_deg) {}

std::vector<PredictedPeak> weighted_predictions(const SceneConfig& scene, double alpha_deg,
                                                const ExperimentSettings& settings) {
    SceneConfig s = scene;
    s.alpha_deg = alpha_deg;
    std::vector<PredictedPeak> peaks = predict_spectrum(s, settings.spectrum);
    for (auto& p : peaks) {
        p = weight_amplitude(p, settings.observer.viewing_distance_mm, settings.observer.mtf);
    }
    return peaks;
}

double perceived_amplitude(const WaveMeasurement& w, const ObserverModel& observer) {
    const double u = perceived_frequency_of_period(observer.viewing_distance_mm, w.period);
    return w.amplitude * mtf_exact(u, observer.mtf);
}

SweepDataset run_sweep(const SceneConfig& scene, const SweepPlan& plan, const ExperimentSettings& settings,
                       const ProgressFn& progress) {
    scene.validate();
    settings.analyzer.validate();
    settings.gates.validate();
    settings.observer.mtf.validate();

    SweepDataset ds;
    ds.scene = scene;
    ds.plan = plan;
    ds.settings = settings;
    const auto [white, black] = calibration_frames(scene);
    ds.calibration = Calibration::from_frames(white, black);

    const std::vector<double> angles = plan.grid();
    ds.records.resize(angles.size());

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::size_t first_error_index = angles.size();
    std::mutex progress_mutex;

    const auto work = [&] {
        for (std::size_t i = next++; i < angles.size(); i = next++) {
            try {
                SceneConfig s = scene;
                s.alpha_deg = angles[i];
                const RasterImage image = render(s);
                AngleRecord rec;
                rec.alpha_deg = angles[i];
                rec.measurements = analyze(image, settings.analyzer, ds.calibration);
                rec.branch_ids.assign(rec.measurements.size(), -1);
                rec.predictions = weighted_predictions(scene, angles[i], settings);
                ds.records[i] = std::move(rec);
            } catch (const Error& e) {
                std::lock_guard lock(error_mutex);
                if (i < first_error_index) {
                    first_error_index = i;
                    first_error = std::make_exception_ptr(AngleError(angles[i], e.what()));
                }
            }
            const std::size_t d = ++done;
            if (progress) {
                std::lock_guard lock(progress_mutex);
                progress(d, angles.size());
            }
        }
    };

    const int n_workers = std::clamp(settings.workers, 1, static_cast<int>(std::max<std::size_t>(angles.size(), 1)));
    if (n_workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) {
            pool.emplace_back(work);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }

    std::vector<SweepStep> steps;
    steps.reserve(ds.records.size());
    for (const auto& r : ds.records) {
        steps.push_back({r.alpha_deg, r.measurements});
    }
    ds.branches = prune_branches(link_branches(steps, settings.gates), settings.prune);
    for (const auto& b : ds.branches) {
        for (const auto& p : b.points) {
            ds.records[p.step].branch_ids[p.source] = b.id;
        }
    }
    return ds;
}

double rank_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw Error("rank_correlation needs equal-length inputs");
    }
    const std::size_t n = a.size();
    if (n < 2) {
        return 0.0;
    }
    const auto ranks = [n](const std::vector<double>& v) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n;) {
            std::size_t j = i;
            while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) {
                ++j;
            }
            const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j));
            for (std::size_t k = i; k <= j; ++k) {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        return r;
    };
    const auto ra = ranks(a);
    const auto rb = ranks(b);
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) {
        return 0.0;
    }
    return sab / std::sqrt(saa * sbb);
}

ComparisonReport compare_to_theory(const SweepDataset& dataset) {
    ComparisonReport report;
    const auto& settings = dataset.settings;

    for (const auto& branch : dataset.branches) {
        BranchComparison bc;
        bc.branch_id = branch.id;
        std::map<std::tuple<int, int, int>, std::size_t> votes;
        for (const auto& pt : branch.points) {
            const auto& preds = dataset.records[pt.step].predictions;
            const PredictedPeak* best = nullptr;
            double best_d = kMatchTolerance;
            for (const auto& p : preds) {
                if (!(p.raw_amplitude > 0.0)) {
                    continue;
                }
                const double d = relative_distance(pt.measurement, p);
                if (d <= best_d) {
                    best_d = d;
                    best = &p;
                }
            }
            if (best) {
                ++votes[{best->m, best->n, best->barrier_order}];
            }
        }
        const auto winner = std::max_element(votes.begin(), votes.end(),
                                             [](const auto& a, const auto& b) { return a.second < b.second; });
        if (winner != votes.end() && 2 * winner->second >= branch.points.size()) {
            bc.matched = true;
            std::tie(bc.m, bc.n, bc.barrier_order) = winner->first;
        }
        const BranchSummary summary = branch_summary(branch);
        bc.label = rational_label(summary.angle_at_max_period, dataset.plan.rational_max_order);
        bc.zero_crossings = wrapped_zero_crossings(branch);

        if (bc.matched) {
            std::vector<double> perceived, predicted;
            for (const auto& pt : branch.points) {
                PredictedPeak fam = family_peak(dataset.scene, bc.m, bc.n, bc.barrier_order, pt.alpha_deg);
                fam = weight_amplitude(fam, settings.observer.viewing_distance_mm, settings.observer.mtf);
                PointResidual r;
                r.alpha_deg = pt.alpha_deg;
                r.predicted_period = fam.period();
                r.measured_period = pt.measurement.period;
                r.period_residual = (r.measured_period - r.predicted_period) / r.predicted_period;
                r.predicted_orientation = fam.orientation_deg;
                r.measured_orientation = pt.measurement.orientation_deg;
                r.orientation_residual = wrap_half_turn(r.measured_orientation - r.predicted_orientation);
                r.predicted_weighted = fam.weighted_fringe_contrast();
                r.perceived = perceived_amplitude(pt.measurement, settings.observer);
                bc.max_abs_period_residual = std::max(bc.max_abs_period_residual, std::abs(r.period_residual));
                bc.max_abs_orientation_residual =
                    std::max(bc.max_abs_orientation_residual, std::abs(r.orientation_residual));
                perceived.push_back(r.perceived);
                predicted.push_back(r.predicted_weighted);
                bc.residuals.push_back(r);
            }
            bc.amplitude_rank_correlation = rank_correlation(perceived, predicted);
            const double amax = rad2deg(std::arg(Complex(bc.m, bc.n)));
            for (double z : bc.zero_crossings) {
                bc.zero_crossing_offsets.push_back(std::abs(wrap_half_turn(z - amax)));
            }
        }
        report.branches.push_back(std::move(bc));
    }

    const double floor = settings.analyzer.min_amplitude;
    for (const auto& rec : dataset.records) {
        DominantCheck dc;
        dc.alpha_deg = rec.alpha_deg;
        const PredictedPeak* dom = nullptr;
        for (const auto& p : rec.predictions) {
            if (p.is_harmonic || p.weighted_fringe_contrast() < floor) {
                continue;
            }
            if (!dom || p.weighted_amplitude > dom->weighted_amplitude) {
                dom = &p;
            }
        }
        if (dom) {
            dc.checked = true;
            dc.m = dom->m;
            dc.n = dom->n;
            dc.barrier_order = dom->barrier_order;
            dc.predicted_period = dom->period();
            dc.predicted_orientation = dom->orientation_deg;
            const WaveMeasurement* best = nullptr;
            double best_d = kMatchTolerance;
            for (const auto& w : rec.measurements) {
                const double d = relative_distance(w, *dom);
                if (d <= best_d) {
                    best_d = d;
                    best = &w;
                }
            }
            if (best) {
                dc.detected = true;
                dc.measured_period = best->period;
                dc.measured_orientation = best->orientation_deg;
                dc.period_residual = (best->period - dc.predicted_period) / dc.predicted_period;
                dc.orientation_residual = wrap_half_turn(best->orientation_deg - dc.predicted_orientation);
            }
        }
        report.dominant.push_back(dc);
    }
    return report;
}

OpeningRatioReport opening_ratio_study(const SceneConfig& scene_base, const std::vector<double>& ratios,
                                       const std::vector<double>& angles, const ExperimentSettings& settings) {
    OpeningRatioReport report;
    const auto [white, black] = calibration_frames(scene_base);
    const Calibration cal = Calibration::from_frames(white, black);
    for (double alpha : angles) {
        for (double r : ratios) {
            SceneConfig s = scene_base;
            s.barrier.opening_ratio = r;
            s.alpha_deg = alpha;
            const RasterImage image = render(s, settings.workers);
            const auto waves = analyze(image, settings.analyzer, cal);
            OpeningRatioRow row;
            row.grid_pitch = s.grid.pitch;
            row.ratio = r;
            row.alpha_deg = alpha;
            row.mean_intensity = image.mean();
            for (const auto& w : waves) {
                row.max_amplitude = std::max(row.max_amplitude, w.amplitude);
                row.max_period = std::max(row.max_period, w.period);
            }
            for (const auto& p : predict_spectrum(s, settings.spectrum)) {
                if (!p.is_harmonic) {
                    row.predicted_amplitude = std::max(row.predicted_amplitude, p.fringe_contrast());
                }
            }
            report.rows.push_back(row);
        }
        std::vector<OpeningRatioRow> in_regime;
        for (const auto& row : report.rows) {
            if (row.alpha_deg == alpha && row.ratio > 0.0 && row.ratio <= 0.5) {
                in_regime.push_back(row);
            }
        }
        std::sort(in_regime.begin(), in_regime.end(),
                  [](const auto& a, const auto& b) { return a.ratio < b.ratio; });
        bool monotone = true;
        for (std::size_t i = 1; i < in_regime.size(); ++i) {
            monotone = monotone && in_regime[i].max_amplitude > in_regime[i - 1].max_amplitude;
        }
        report.trends.push_back({scene_base.grid.pitch, alpha, monotone});
    }
    return report;
}

std::vector<PitchRow> pitch_study(const SceneConfig& scene_base, const std::vector<double>& pitches,
                                  double alpha_deg, const ExperimentSettings& settings) {
    std::vector<PitchRow> rows;
    for (double pitch : pitches) {
        SceneConfig s = scene_base;
        s.barrier.pitch = pitch;
        s.alpha_deg = alpha_deg;
        const double finest = std::min(s.grid.pitch, s.barrier.pitch);
        if (finest * s.resolution < kMinSamplesPerPeriod) {
            // keep the extent, densify the raster to an even sample count
            const int size = 2 * static_cast<int>(std::ceil(0.5 * s.extent_mm * (kMinSamplesPerPeriod + 0.25) / finest));
            s.resolution = size / s.extent_mm;
        }
        const auto [white, black] = calibration_frames(s);
        const Calibration cal = Calibration::from_frames(white, black);
        const auto waves = analyze(render(s, settings.workers), settings.analyzer, cal);
        PitchRow row;
        row.barrier_pitch = pitch;
        row.rho = s.rho();
        row.alpha_deg = alpha_deg;
        for (const auto& w : waves) {
            row.max_period = std::max(row.max_period, w.period);
            row.max_amplitude = std::max(row.max_amplitude, w.amplitude);
            row.max_perceived_amplitude = std::max(row.max_perceived_amplitude, perceived_amplitude(w, settings.observer));
        }
        rows.push_back(row);
    }
    return rows;
}

FreeAngleCriterion free_angle_criterion_from_string(const std::string& name) {
    if (name == "max-distance-to-rational" || name == "max-distance") {
        return FreeAngleCriterion::MaxDistanceToRational;
    }
    if (name == "min-predicted-amplitude" || name == "min-amplitude") {
        return FreeAngleCriterion::MinPredictedAmplitude;
    }
    throw Error(fmt::format("unknown moiré-free criterion '{}'", name));
}

std::string to_string(FreeAngleCriterion c) {
    return c == FreeAngleCriterion::MaxDistanceToRational ? "max-distance-to-rational" : "min-predicted-amplitude";
}

std::vector<FreeAngleCandidate> find_moire_free(const SceneConfig& scene, const SweepPlan& plan,
                                                FreeAngleCriterion criterion,
                                                const ExperimentSettings& settings, std::size_t top_n,
                                                double neighbourhood_deg) {
    plan.validate();
    std::vector<double> lattice;
    const long k0 = static_cast<long>(std::ceil(plan.alpha_start / plan.fine_step - 1e-9));
    const long k1 = static_cast<long>(std::floor(plan.alpha_end / plan.fine_step + 1e-9));
    for (long k = k0; k <= k1; ++k) {
        lattice.push_back(round_angle(k * plan.fine_step));
    }
    if (lattice.empty()) {
        return {};
    }

    const bool maximise = criterion == FreeAngleCriterion::MaxDistanceToRational;
    std::vector<double> score(lattice.size());
    if (maximise) {
        for (std::size_t i = 0; i < lattice.size(); ++i) {
            score[i] = distance_to_rational(lattice[i], plan.rational_max_order);
        }
    } else {
        std::vector<double> total(lattice.size(), 0.0);
        for (std::size_t i = 0; i < lattice.size(); ++i) {
            for (const auto& p : weighted_predictions(scene, lattice[i], settings)) {
                if (!p.is_harmonic) {
                    total[i] += p.weighted_fringe_contrast();
                }
            }
        }
        const long half = static_cast<long>(std::floor(neighbourhood_deg / plan.fine_step + 1e-9));
        for (std::size_t i = 0; i < lattice.size(); ++i) {
            const long lo = std::max(0L, static_cast<long>(i) - half);
            const long hi = std::min(static_cast<long>(lattice.size()) - 1, static_cast<long>(i) + half);
            score[i] = *std::max_element(total.begin() + lo, total.begin() + hi + 1);
        }
    }

    // local optima; a plateau is represented by its point farthest from any
    // rational angle (its centre on ties), since a wide quiet plateau may well
    // straddle one
    const auto better = [&](double a, double b) { return maximise ? a > b : a < b; };
    std::vector<FreeAngleCandidate> out;
    for (std::size_t i = 0; i < lattice.size();) {
        std::size_t j = i;
        while (j + 1 < lattice.size() && score[j + 1] == score[i]) {
            ++j;
        }
        const bool left_ok = i == 0 || better(score[i], score[i - 1]);
        const bool right_ok = j + 1 == lattice.size() || better(score[i], score[j + 1]);
        const double mid = 0.5 * static_cast<double>(i + j);
        std::size_t pick = i;
        double pick_d = -1.0;
        for (std::size_t k = i; k <= j; ++k) {
            const double d = distance_to_rational(lattice[k], plan.rational_max_order);
            if (d > pick_d + 1e-9 ||
                (std::abs(d - pick_d) <= 1e-9 && std::abs(k - mid) < std::abs(pick - mid))) {
                pick = k;
                pick_d = d;
            }
        }
        if (left_ok && right_ok && pick_d > 0.5) {
            out.push_back({lattice[pick], score[pick]});
        }
        i = j + 1;
    }
    std::stable_sort(out.begin(), out.end(), [&](const auto& a, const auto& b) { return better(a.score, b.score); });
    if (out.size() > top_n) {
        out.resize(top_n);
    }
    return out;
}

}  // namespace moire
