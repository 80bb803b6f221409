// moire: command-line driver for the moiré sweep experiment.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <json.hpp>

#include "moire/config.hpp"
#include "moire/image_io.hpp"
#include "moire/renderer.hpp"
#include "moire/report.hpp"

namespace fs = std::filesystem;
using namespace moire;

namespace {

struct Common {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out;
    std::optional<int> workers;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

ExperimentConfig resolve(const Common& c) {
    YAML::Node doc = c.config_path.empty() ? YAML::Node(YAML::NodeType::Map) : YAML::LoadFile(c.config_path);
    if (doc.IsNull()) {
        doc = YAML::Node(YAML::NodeType::Map);
    }
    for (const auto& o : c.overrides) {
        apply_override(doc, o);
    }
    if (c.workers) {
        apply_override(doc, fmt::format("output.workers={}", *c.workers));
    }
    if (c.seed) {
        apply_override(doc, fmt::format("scene.seed={}", *c.seed));
    }
    if (!c.out.empty()) {
        doc["output"]["dir"] = c.out;
    }
    return config_from_yaml(doc);
}

void say(const Common& c, const std::string& msg) {
    if (!c.quiet) {
        std::cerr << msg << '\n';
    }
}

ProgressFn progress_printer(const Common& c) {
    if (c.quiet) {
        return {};
    }
    return [](std::size_t done, std::size_t total) {
        if (done == total || done % 50 == 0) {
            std::cerr << fmt::format("\r  {}/{} angles", done, total) << (done == total ? "\n" : "") << std::flush;
        }
    };
}

void error_record(const std::string& kind, const std::string& message, std::optional<double> alpha = {}) {
    nlohmann::json j{{"error", kind}, {"message", message}};
    if (alpha) {
        j["alpha_deg"] = *alpha;
    }
    std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Moiré sweep experiment: render, analyse, track and compare against theory"};
    app.require_subcommand(1);

    Common common;
    app.add_option("-c,--config", common.config_path, "YAML experiment document")->check(CLI::ExistingFile);
    app.add_option("-s,--set", common.overrides, "override a config key, e.g. scene.barrier.pitch=0.508")
        ->allow_extra_args(false);
    app.add_option("-o,--out", common.out, "output directory (output.dir)");
    app.add_option("-j,--workers", common.workers, "parallel workers (output.workers)");
    app.add_option("--seed", common.seed, "jitter seed (scene.seed)");
    app.add_flag("-q,--quiet", common.quiet, "no progress output");

    // synth
    auto* synth = app.add_subcommand("synth", "render one scene to PNG or PGM");
    std::optional<double> synth_alpha;
    std::string synth_file;
    bool synth_calibration = false;
    synth->add_option("-a,--alpha", synth_alpha, "rotation angle in degrees (scene.alpha_deg)");
    synth->add_option("-f,--file", synth_file, "image path (.png or .pgm); default <out>/alpha_<a>.png");
    synth->add_flag("--calibration", synth_calibration, "also write the white and black reference frames");

    // analyze
    auto* analyze_cmd = app.add_subcommand("analyze", "measure the plane waves of images, CSV to stdout or --csv");
    std::vector<std::string> images;
    std::string analyze_csv = "-";
    std::optional<double> analyze_alpha;
    analyze_cmd->add_option("images", images, "PNG/PGM images")->required()->check(CLI::ExistingFile);
    analyze_cmd->add_option("--csv", analyze_csv, "output CSV path, '-' for stdout");
    analyze_cmd->add_option("-a,--alpha", analyze_alpha, "angle to record when the image has no sidecar");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run the full angle sweep and write tables and plots");

    // theory
    auto* theory = app.add_subcommand("theory", "predicted spectrum only");
    std::vector<double> theory_alphas;
    theory->add_option("-a,--alpha", theory_alphas, "angles in degrees; default the sweep grid");

    // compare
    auto* compare = app.add_subcommand("compare", "compare a saved sweep with theory");
    std::string compare_dataset;
    compare->add_option("-d,--dataset", compare_dataset, "dataset.json; default <out>/dataset.json");

    // or-study
    auto* or_study = app.add_subcommand("or-study", "vary the barrier opening ratio");

    // find-free
    auto* find_free = app.add_subcommand("find-free", "rank candidate moire-free angles");
    std::string criterion = "max-distance-to-rational";
    std::size_t top_n = 5;
    double neighbourhood = 0.5;
    find_free->add_option("--criterion", criterion, "max-distance-to-rational | min-predicted-amplitude");
    find_free->add_option("-n,--top", top_n, "number of candidates");
    find_free->add_option("--neighbourhood", neighbourhood, "half width in degrees for min-predicted-amplitude");

    // report
    auto* report = app.add_subcommand("report", "regenerate tables and plots from a saved sweep");
    std::string report_dataset;
    bool report_pitches = false;
    report->add_option("-d,--dataset", report_dataset, "dataset.json; default <out>/dataset.json");
    report->add_flag("--pitches", report_pitches, "also run the barrier pitch study (studies.pitches)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        error_record("usage", e.what());
        return 2;
    }

    try {
        ExperimentConfig cfg = resolve(common);
        const fs::path out = cfg.output_dir;
        const int workers = cfg.settings.workers;

        if (synth->parsed()) {
            if (synth_alpha) {
                cfg.scene.alpha_deg = *synth_alpha;
            }
            const RasterImage img = render(cfg.scene, workers);
            const fs::path file = synth_file.empty() ? out / (img.id + ".png") : fs::path(synth_file);
            if (file.has_parent_path()) {
                fs::create_directories(file.parent_path());
            }
            save_image(file, img);
            std::cout << file.string() << '\n';
            if (synth_calibration) {
                const auto [white, black] = calibration_frames(cfg.scene);
                const fs::path dir = file.has_parent_path() ? file.parent_path() : fs::path(".");
                save_image(dir / "white.png", white);
                save_image(dir / "black.png", black);
                std::cout << (dir / "white.png").string() << '\n' << (dir / "black.png").string() << '\n';
            }
        } else if (analyze_cmd->parsed()) {
            std::string csv = measurements_csv_header();
            for (const auto& path : images) {
                const RasterImage img = load_image(path);
                const double alpha = img.alpha_deg.value_or(analyze_alpha.value_or(0.0));
                csv += measurements_csv_rows(img.id.empty() ? fs::path(path).stem().string() : img.id, alpha,
                                             analyze(img, cfg.settings.analyzer));
            }
            if (analyze_csv == "-") {
                std::cout << csv;
            } else {
                write_text(analyze_csv, csv);
            }
        } else if (sweep->parsed()) {
            say(common, fmt::format("sweep rho = {:.4f}, {} angles, {} worker(s)", cfg.scene.rho(),
                                    cfg.plan.grid().size(), workers));
            const SweepDataset ds = run_sweep(cfg.scene, cfg.plan, cfg.settings, progress_printer(common));
            fs::create_directories(out);
            save_dataset(out / "dataset.json", ds);
            for (const auto& p : emit_reports(ds, out)) {
                std::cout << p.string() << '\n';
            }
            std::cout << (out / "dataset.json").string() << '\n';
            say(common, fmt::format("{} branches after pruning", ds.branches.size()));
        } else if (theory->parsed()) {
            const std::vector<double> alphas = theory_alphas.empty() ? cfg.plan.grid() : theory_alphas;
            std::vector<std::vector<PredictedPeak>> preds;
            for (double a : alphas) {
                preds.push_back(weighted_predictions(cfg.scene, a, cfg.settings));
            }
            write_text(out / "predictions.csv", predictions_csv(alphas, preds));
            std::cout << (out / "predictions.csv").string() << '\n';
        } else if (compare->parsed()) {
            const SweepDataset ds = load_dataset(compare_dataset.empty() ? out / "dataset.json" : fs::path(compare_dataset));
            const ComparisonReport rep = compare_to_theory(ds);
            write_text(out / "comparison.csv", comparison_csv(rep));
            write_text(out / "comparison.json", comparison_json(rep).dump(1) + "\n");
            std::cout << (out / "comparison.csv").string() << '\n' << (out / "comparison.json").string() << '\n';
            for (const auto& b : rep.branches) {
                say(common, b.matched ? fmt::format("branch {}: ({},{}) p={} max |dP|={:.2f}% max |dphi|={:.3f}",
                                                    b.branch_id, b.m, b.n, b.barrier_order,
                                                    100 * b.max_abs_period_residual, b.max_abs_orientation_residual)
                                      : fmt::format("branch {}: no theoretical match", b.branch_id));
            }
        } else if (or_study->parsed()) {
            OpeningRatioReport all;
            for (double gp : cfg.studies.or_grid_pitches) {
                SceneConfig scene = cfg.scene;
                scene.grid.pitch = gp;
                const auto rep =
                    opening_ratio_study(scene, cfg.studies.opening_ratios, cfg.studies.or_angles, cfg.settings);
                all.rows.insert(all.rows.end(), rep.rows.begin(), rep.rows.end());
                all.trends.insert(all.trends.end(), rep.trends.begin(), rep.trends.end());
            }
            write_text(out / "opening_ratio.csv", opening_ratio_csv(all));
            std::cout << (out / "opening_ratio.csv").string() << '\n';
            for (const auto& t : all.trends) {
                say(common, fmt::format("grid {:.3f} mm, alpha {:.3f}: amplitude {} with ratio", t.grid_pitch,
                                        t.alpha_deg, t.monotone ? "increases" : "does NOT increase"));
            }
        } else if (find_free->parsed()) {
            const auto crit = free_angle_criterion_from_string(criterion);
            const auto cands = find_moire_free(cfg.scene, cfg.plan, crit, cfg.settings, top_n, neighbourhood);
            const std::string csv = free_angles_csv(cands, crit);
            write_text(out / "free_angles.csv", csv);
            std::cout << csv;
        } else if (report->parsed()) {
            const SweepDataset ds = load_dataset(report_dataset.empty() ? out / "dataset.json" : fs::path(report_dataset));
            for (const auto& p : emit_reports(ds, out)) {
                std::cout << p.string() << '\n';
            }
            if (report_pitches) {
                const auto rows =
                    pitch_study(cfg.scene, cfg.studies.pitches, cfg.studies.pitch_angle, cfg.settings);
                for (const auto& p : emit_pitch_report(rows, out)) {
                    std::cout << p.string() << '\n';
                }
            }
        }
    } catch (const AngleError& e) {
        error_record("angle", e.what(), e.alpha_deg());
        return 1;
    } catch (const Error& e) {
        error_record("input", e.what());
        return 1;
    } catch (const YAML::Exception& e) {
        error_record("config", e.what());
        return 1;
    } catch (const std::exception& e) {
        error_record("internal", e.what());
        return 3;
    }
    return 0;
}
