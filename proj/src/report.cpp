#include "moire/report.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include <fmt/core.h>

namespace moire {

namespace {

std::string num(double v) {
    if (!std::isfinite(v)) {
        return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
    }
    return fmt::format("{:.9g}", v);
}

std::string ang(double v) {
    return fmt::format("{:.4f}", v);
}

std::string branch_name(const Branch& b) {
    const auto lbl = rational_label(b.angle_at_max_period);
    return lbl ? fmt::format("#{} @{:.1f} ({})", b.id, b.angle_at_max_period, *lbl)
               : fmt::format("#{} @{:.1f}", b.id, b.angle_at_max_period);
}

}  // namespace

std::string measurements_csv_header() {
    return "image_id,alpha_deg,k_cpmm,period_mm,phi_deg,amplitude,snr\n";
}

std::string measurements_csv_rows(const std::string& image_id, double alpha_deg,
                                  const std::vector<WaveMeasurement>& waves) {
    std::string out;
    for (const auto& w : waves) {
        out += fmt::format("{},{},{},{},{},{},{}\n", image_id, ang(alpha_deg), num(w.wavenumber), num(w.period),
                           num(w.orientation_deg), num(w.amplitude), num(w.snr));
    }
    return out;
}

std::string measurements_csv(const SweepDataset& ds) {
    std::string out = measurements_csv_header();
    for (const auto& r : ds.records) {
        out += measurements_csv_rows(fmt::format("alpha_{:+.3f}", r.alpha_deg), r.alpha_deg, r.measurements);
    }
    return out;
}

std::string branches_csv(const SweepDataset& ds) {
    std::string out = "branch_id,alpha_deg,period_mm,phi_deg,wrapped_phi_deg,amplitude\n";
    for (const auto& b : ds.branches) {
        for (const auto& p : b.points) {
            out += fmt::format("{},{},{},{},{},{}\n", b.id, ang(p.alpha_deg), num(p.measurement.period),
                               num(p.measurement.orientation_deg),
                               num(wrapped_orientation(p.measurement.orientation_deg, p.alpha_deg)),
                               num(p.measurement.amplitude));
        }
    }
    return out;
}

nlohmann::json branch_summary_json(const SweepDataset& ds) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& b : ds.branches) {
        const BranchSummary s = branch_summary(b);
        const auto lbl = rational_label(s.angle_at_max_period, ds.plan.rational_max_order);
        arr.push_back({{"branch_id", b.id},
                       {"points", b.points.size()},
                       {"alpha_start", b.points.front().alpha_deg},
                       {"alpha_end", b.points.back().alpha_deg},
                       {"angle_at_max_period", s.angle_at_max_period},
                       {"max_period_mm", s.max_period},
                       {"max_amplitude", s.max_amplitude},
                       {"orientation_at_max", s.orientation_at_max},
                       {"rational_label", lbl ? nlohmann::json(*lbl) : nlohmann::json(nullptr)},
                       {"period_maxima", local_period_maxima(b)},
                       {"zero_crossings", wrapped_zero_crossings(b)}});
    }
    return arr;
}

std::string predictions_csv(const std::vector<double>& alphas, const std::vector<std::vector<PredictedPeak>>& preds) {
    std::string out =
        "alpha_deg,m,n,barrier_order,k_cpmm,period_mm,phi_deg,magnification,max_angle_deg,raw_amplitude,"
        "weighted_amplitude,fringe_contrast,is_harmonic\n";
    for (std::size_t i = 0; i < alphas.size() && i < preds.size(); ++i) {
        for (const auto& p : preds[i]) {
            out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", ang(alphas[i]), p.m, p.n, p.barrier_order,
                               num(p.wavenumber), num(p.period()), num(p.orientation_deg), num(p.magnification),
                               num(p.max_angle_deg), num(p.raw_amplitude), num(p.weighted_amplitude),
                               num(p.fringe_contrast()), p.is_harmonic ? 1 : 0);
        }
    }
    return out;
}

std::string predictions_csv(const SweepDataset& ds) {
    std::vector<double> alphas;
    std::vector<std::vector<PredictedPeak>> preds;
    for (const auto& r : ds.records) {
        alphas.push_back(r.alpha_deg);
        preds.push_back(r.predictions);
    }
    return predictions_csv(alphas, preds);
}

std::string comparison_csv(const ComparisonReport& report) {
    std::string out =
        "branch_id,matched,m,n,barrier_order,alpha_deg,predicted_period_mm,measured_period_mm,period_residual,"
        "predicted_phi_deg,measured_phi_deg,phi_residual_deg,predicted_weighted,perceived_amplitude\n";
    for (const auto& b : report.branches) {
        if (b.residuals.empty()) {
            out += fmt::format("{},{},{},{},{},,,,,,,,,\n", b.branch_id, b.matched ? 1 : 0, b.m, b.n, b.barrier_order);
        }
        for (const auto& r : b.residuals) {
            out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", b.branch_id, b.matched ? 1 : 0, b.m, b.n,
                               b.barrier_order, ang(r.alpha_deg), num(r.predicted_period), num(r.measured_period),
                               num(r.period_residual), num(r.predicted_orientation), num(r.measured_orientation),
                               num(r.orientation_residual), num(r.predicted_weighted), num(r.perceived));
        }
    }
    return out;
}

nlohmann::json comparison_json(const ComparisonReport& report) {
    nlohmann::json j;
    j["branches"] = nlohmann::json::array();
    for (const auto& b : report.branches) {
        j["branches"].push_back({{"branch_id", b.branch_id},
                                 {"matched", b.matched},
                                 {"m", b.m},
                                 {"n", b.n},
                                 {"barrier_order", b.barrier_order},
                                 {"label", b.label ? nlohmann::json(*b.label) : nlohmann::json(nullptr)},
                                 {"max_abs_period_residual", b.max_abs_period_residual},
                                 {"max_abs_orientation_residual", b.max_abs_orientation_residual},
                                 {"amplitude_rank_correlation", b.amplitude_rank_correlation},
                                 {"zero_crossings", b.zero_crossings},
                                 {"zero_crossing_offsets", b.zero_crossing_offsets}});
    }
    std::size_t checked = 0, detected = 0;
    double worst_period = 0.0, worst_phi = 0.0;
    for (const auto& d : report.dominant) {
        if (!d.checked) {
            continue;
        }
        ++checked;
        if (d.detected) {
            ++detected;
            worst_period = std::max(worst_period, std::abs(d.period_residual));
            worst_phi = std::max(worst_phi, std::abs(d.orientation_residual));
        }
    }
    j["dominant"] = {{"checked", checked},
                     {"detected", detected},
                     {"max_abs_period_residual", worst_period},
                     {"max_abs_orientation_residual", worst_phi}};
    return j;
}

std::string opening_ratio_csv(const OpeningRatioReport& report) {
    std::string out =
        "grid_pitch_mm,opening_ratio,alpha_deg,max_amplitude,max_period_mm,predicted_amplitude,mean_intensity\n";
    for (const auto& r : report.rows) {
        out += fmt::format("{},{},{},{},{},{},{}\n", num(r.grid_pitch), num(r.ratio), ang(r.alpha_deg),
                           num(r.max_amplitude), num(r.max_period), num(r.predicted_amplitude), num(r.mean_intensity));
    }
    return out;
}

std::string pitch_csv(const std::vector<PitchRow>& rows) {
    std::string out = "barrier_pitch_mm,rho,alpha_deg,max_period_mm,max_amplitude,max_perceived_amplitude\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{},{}\n", num(r.barrier_pitch), num(r.rho), ang(r.alpha_deg),
                           num(r.max_period), num(r.max_amplitude), num(r.max_perceived_amplitude));
    }
    return out;
}

std::string free_angles_csv(const std::vector<FreeAngleCandidate>& candidates, FreeAngleCriterion criterion) {
    std::string out = "rank,alpha_deg,score,criterion\n";
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        out += fmt::format("{},{},{},{}\n", i + 1, ang(candidates[i].alpha_deg), num(candidates[i].score),
                           to_string(criterion));
    }
    return out;
}

Figure sweep_figure(const SweepDataset& ds) {
    Figure fig;
    fig.title = fmt::format("moire branches, rho = {:.3f}", ds.scene.rho());
    Panel phi{"wrapped orientation", "alpha (deg)", "phi - alpha (deg)", {}, -90.0, 90.0};
    Panel per{"period", "alpha (deg)", "period (mm)", {}};
    Panel amp{"amplitude", "alpha (deg)", "amplitude", {}};
    for (const auto& b : ds.branches) {
        Series s_phi{branch_name(b), {}, {}, false};
        Series s_per{branch_name(b), {}, {}, true};
        Series s_amp{branch_name(b), {}, {}, true};
        for (const auto& p : b.points) {
            s_phi.x.push_back(p.alpha_deg);
            s_phi.y.push_back(wrapped_orientation(p.measurement.orientation_deg, p.alpha_deg));
            s_per.x.push_back(p.alpha_deg);
            s_per.y.push_back(p.measurement.period);
            s_amp.x.push_back(p.alpha_deg);
            s_amp.y.push_back(p.measurement.amplitude);
        }
        phi.series.push_back(std::move(s_phi));
        per.series.push_back(std::move(s_per));
        amp.series.push_back(std::move(s_amp));
    }
    fig.panels = {phi, per, amp};
    return fig;
}

Figure max_amplitude_figure(const SweepDataset& ds) {
    Figure fig;
    fig.title = "maximum amplitude per branch";
    Panel p{"", "angle of period maximum (deg)", "max amplitude", {}};
    for (const auto& b : ds.branches) {
        // negative and positive angles of one family stay separate series
        p.series.push_back({branch_name(b), {b.angle_at_max_period}, {b.max_amplitude}, false});
    }
    fig.panels = {p};
    return fig;
}

Figure pitch_figure(const std::vector<PitchRow>& rows) {
    Figure fig;
    fig.title = rows.empty() ? "pitch study" : fmt::format("pitch study at {:.1f} deg", rows.front().alpha_deg);
    Series per{"max period", {}, {}, true};
    Series amp{"max amplitude", {}, {}, true};
    Series perc{"perceived", {}, {}, true};
    for (const auto& r : rows) {
        per.x.push_back(r.barrier_pitch);
        per.y.push_back(r.max_period);
        amp.x.push_back(r.barrier_pitch);
        amp.y.push_back(r.max_amplitude);
        perc.x.push_back(r.barrier_pitch);
        perc.y.push_back(r.max_perceived_amplitude);
    }
    fig.panels = {Panel{"period", "barrier pitch (mm)", "period (mm)", {per}},
                  Panel{"amplitude", "barrier pitch (mm)", "amplitude", {amp, perc}}};
    return fig;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw Error(fmt::format("cannot create directory '{}': {}", path.parent_path().string(), ec.message()));
        }
    }
    std::ofstream out(path, std::ios::binary);
    out << text;
    out.close();
    if (!out) {
        throw Error(fmt::format("cannot write '{}'", path.string()));
    }
}

std::vector<std::filesystem::path> emit_reports(const SweepDataset& ds, const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> written;
    auto put = [&](const char* name, const std::string& text) {
        write_text(dir / name, text);
        written.push_back(dir / name);
    };
    put("measurements.csv", measurements_csv(ds));
    put("branches.csv", branches_csv(ds));
    put("branch_summary.json", branch_summary_json(ds).dump(1) + "\n");
    put("predictions.csv", predictions_csv(ds));
    if (!ds.branches.empty()) {
        put("sweep.svg", render_svg(sweep_figure(ds)));
        put("max_amplitude.svg", render_svg(max_amplitude_figure(ds)));
    }
    return written;
}

std::vector<std::filesystem::path> emit_pitch_report(const std::vector<PitchRow>& rows,
                                                     const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> written{dir / "pitch_study.csv"};
    write_text(written.back(), pitch_csv(rows));
    if (!rows.empty()) {
        written.push_back(dir / "pitch_study.svg");
        write_text(written.back(), render_svg(pitch_figure(rows)));
    }
    return written;
}

}  // namespace moire
