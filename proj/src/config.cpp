#include "moire/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/core.h>

namespace moire {

namespace {

using Keys = std::set<std::string>;

void check_keys(const YAML::Node& node, const std::string& where, const Keys& allowed) {
    if (!node) {
        return;
    }
    if (!node.IsMap()) {
        throw Error(fmt::format("config section '{}' must be a mapping", where));
    }
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) {
            throw Error(fmt::format("unknown config key '{}{}{}'", where, where.empty() ? "" : ".", key));
        }
    }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& value, const std::string& where) {
    if (!node || !node[key]) {
        return;
    }
    try {
        value = node[key].as<T>();
    } catch (const YAML::Exception& e) {
        throw Error(fmt::format("config key '{}.{}': {}", where, key, e.what()));
    }
}

void read_grating(const YAML::Node& node, GratingSpec& g, const std::string& where) {
    check_keys(node, where, {"pitch", "opening_ratio", "phase"});
    if (!node) {
        return;
    }
    read(node, "pitch", g.pitch, where);
    read(node, "opening_ratio", g.opening_ratio, where);
    if (node["phase"]) {
        if (node["phase"].IsSequence()) {
            const auto v = node["phase"].as<std::vector<double>>();
            if (v.empty() || v.size() > 2) {
                throw Error(fmt::format("config key '{}.phase' needs one or two values", where));
            }
            g.phase[0] = v[0];
            g.phase[1] = v.size() > 1 ? v[1] : 0.0;
        } else {
            g.phase[0] = node["phase"].as<double>();
        }
    }
}

YAML::Node grating_yaml(const GratingSpec& g) {
    YAML::Node n;
    n["pitch"] = g.pitch;
    n["opening_ratio"] = g.opening_ratio;
    if (g.kind == GratingKind::PixelGrid2D) {
        n["phase"].push_back(g.phase[0]);
        n["phase"].push_back(g.phase[1]);
    } else {
        n["phase"] = g.phase[0];
    }
    return n;
}

nlohmann::json wave_to_json(const WaveMeasurement& w) {
    return {{"k", w.wavenumber}, {"phi", w.orientation_deg}, {"A", w.amplitude}, {"period", w.period}, {"snr", w.snr}};
}

WaveMeasurement wave_from_json(const nlohmann::json& j) {
    WaveMeasurement w;
    w.wavenumber = j.at("k").get<double>();
    w.orientation_deg = j.at("phi").get<double>();
    w.amplitude = j.at("A").get<double>();
    w.period = j.at("period").get<double>();
    w.snr = j.at("snr").get<double>();
    return w;
}

nlohmann::json peak_to_json(const PredictedPeak& p) {
    return {{"m", p.m},
            {"n", p.n},
            {"p", p.barrier_order},
            {"zx", p.wavevector.real()},
            {"zy", p.wavevector.imag()},
            {"k", p.wavenumber},
            {"phi", p.orientation_deg},
            {"mu", std::isfinite(p.magnification) ? nlohmann::json(p.magnification) : nlohmann::json(nullptr)},
            {"alpha_max", p.max_angle_deg},
            {"rho", p.rho},
            {"raw", p.raw_amplitude},
            {"weighted", p.weighted_amplitude},
            {"harmonic", p.is_harmonic}};
}

PredictedPeak peak_from_json(const nlohmann::json& j) {
    PredictedPeak p;
    p.m = j.at("m").get<int>();
    p.n = j.at("n").get<int>();
    p.barrier_order = j.at("p").get<int>();
    p.wavevector = {j.at("zx").get<double>(), j.at("zy").get<double>()};
    p.wavenumber = j.at("k").get<double>();
    p.orientation_deg = j.at("phi").get<double>();
    p.magnification = j.at("mu").is_null() ? std::numeric_limits<double>::infinity() : j.at("mu").get<double>();
    p.max_angle_deg = j.at("alpha_max").get<double>();
    p.rho = j.at("rho").get<double>();
    p.raw_amplitude = j.at("raw").get<double>();
    p.weighted_amplitude = j.at("weighted").get<double>();
    p.is_harmonic = j.at("harmonic").get<bool>();
    return p;
}

}  // namespace

ExperimentConfig config_from_yaml(const YAML::Node& root) {
    ExperimentConfig c;
    if (!root || root.IsNull()) {
        return c;
    }
    check_keys(root, "", {"scene", "plan", "analyzer", "gates", "prune", "theory", "studies", "output"});

    const YAML::Node scene = root["scene"];
    check_keys(scene, "scene",
               {"grid", "barrier", "alpha_deg", "extent_mm", "resolution", "supersample", "seed"});
    if (scene) {
        read_grating(scene["grid"], c.scene.grid, "scene.grid");
        read_grating(scene["barrier"], c.scene.barrier, "scene.barrier");
        read(scene, "alpha_deg", c.scene.alpha_deg, "scene");
        read(scene, "extent_mm", c.scene.extent_mm, "scene");
        read(scene, "resolution", c.scene.resolution, "scene");
        read(scene, "supersample", c.scene.supersample, "scene");
        read(scene, "seed", c.scene.seed, "scene");
    }

    const YAML::Node plan = root["plan"];
    check_keys(plan, "plan",
               {"alpha_start", "alpha_end", "coarse_step", "fine_step", "refine_radius", "rational_max_order"});
    read(plan, "alpha_start", c.plan.alpha_start, "plan");
    read(plan, "alpha_end", c.plan.alpha_end, "plan");
    read(plan, "coarse_step", c.plan.coarse_step, "plan");
    read(plan, "fine_step", c.plan.fine_step, "plan");
    read(plan, "refine_radius", c.plan.refine_radius, "plan");
    read(plan, "rational_max_order", c.plan.rational_max_order, "plan");

    const YAML::Node an = root["analyzer"];
    auto& a = c.settings.analyzer;
    check_keys(an, "analyzer",
               {"amplitude_floor", "min_amplitude", "min_snr", "max_frequency", "max_peaks", "dc_guard_bins",
                "subbin_refinement", "harmonic_angle_tol_deg", "harmonic_ratio_tol"});
    read(an, "amplitude_floor", a.amplitude_floor, "analyzer");
    read(an, "min_amplitude", a.min_amplitude, "analyzer");
    read(an, "min_snr", a.min_snr, "analyzer");
    if (an && an["max_frequency"] && !an["max_frequency"].IsNull()) {
        a.max_frequency = an["max_frequency"].as<double>();
    }
    read(an, "max_peaks", a.max_peaks, "analyzer");
    read(an, "dc_guard_bins", a.dc_guard_bins, "analyzer");
    read(an, "subbin_refinement", a.subbin_refinement, "analyzer");
    read(an, "harmonic_angle_tol_deg", a.harmonic_angle_tol_deg, "analyzer");
    read(an, "harmonic_ratio_tol", a.harmonic_ratio_tol, "analyzer");

    const YAML::Node gates = root["gates"];
    check_keys(gates, "gates", {"max_dphi_deg", "max_dperiod", "max_gap"});
    read(gates, "max_dphi_deg", c.settings.gates.max_dphi_deg, "gates");
    read(gates, "max_dperiod", c.settings.gates.max_dperiod, "gates");
    read(gates, "max_gap", c.settings.gates.max_gap, "gates");

    const YAML::Node prune = root["prune"];
    check_keys(prune, "prune", {"min_points", "min_rel_amplitude", "min_rel_period"});
    read(prune, "min_points", c.settings.prune.min_points, "prune");
    read(prune, "min_rel_amplitude", c.settings.prune.min_rel_amplitude, "prune");
    read(prune, "min_rel_period", c.settings.prune.min_rel_period, "prune");

    const YAML::Node theory = root["theory"];
    check_keys(theory, "theory",
               {"visibility_fraction", "grid_order_bound", "barrier_order_bound", "viewing_distance_mm", "pupil_mm",
                "wavelength_nm"});
    read(theory, "visibility_fraction", c.settings.spectrum.visibility_fraction, "theory");
    read(theory, "grid_order_bound", c.settings.spectrum.grid_order_bound, "theory");
    read(theory, "barrier_order_bound", c.settings.spectrum.barrier_order_bound, "theory");
    read(theory, "viewing_distance_mm", c.settings.observer.viewing_distance_mm, "theory");
    read(theory, "pupil_mm", c.settings.observer.mtf.pupil_mm, "theory");
    read(theory, "wavelength_nm", c.settings.observer.mtf.wavelength_nm, "theory");

    const YAML::Node studies = root["studies"];
    check_keys(studies, "studies", {"opening_ratios", "or_angles", "or_grid_pitches", "pitches", "pitch_angle"});
    read(studies, "opening_ratios", c.studies.opening_ratios, "studies");
    read(studies, "or_angles", c.studies.or_angles, "studies");
    read(studies, "or_grid_pitches", c.studies.or_grid_pitches, "studies");
    read(studies, "pitches", c.studies.pitches, "studies");
    read(studies, "pitch_angle", c.studies.pitch_angle, "studies");

    const YAML::Node output = root["output"];
    check_keys(output, "output", {"dir", "workers"});
    read(output, "dir", c.output_dir, "output");
    read(output, "workers", c.settings.workers, "output");

    c.scene.validate();
    c.plan.validate();
    c.settings.analyzer.validate();
    c.settings.gates.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    try {
        return config_from_yaml(YAML::LoadFile(path.string()));
    } catch (const YAML::Exception& e) {
        throw Error(fmt::format("cannot parse config '{}': {}", path.string(), e.what()));
    }
}

YAML::Node config_to_yaml(const ExperimentConfig& c) {
    YAML::Node root;
    auto scene = root["scene"];
    scene["grid"] = grating_yaml(c.scene.grid);
    scene["barrier"] = grating_yaml(c.scene.barrier);
    scene["alpha_deg"] = c.scene.alpha_deg;
    scene["extent_mm"] = c.scene.extent_mm;
    scene["resolution"] = c.scene.resolution;
    scene["supersample"] = c.scene.supersample;
    scene["seed"] = c.scene.seed;

    auto plan = root["plan"];
    plan["alpha_start"] = c.plan.alpha_start;
    plan["alpha_end"] = c.plan.alpha_end;
    plan["coarse_step"] = c.plan.coarse_step;
    plan["fine_step"] = c.plan.fine_step;
    plan["refine_radius"] = c.plan.refine_radius;
    plan["rational_max_order"] = c.plan.rational_max_order;

    const auto& a = c.settings.analyzer;
    auto an = root["analyzer"];
    an["amplitude_floor"] = a.amplitude_floor;
    an["min_amplitude"] = a.min_amplitude;
    an["min_snr"] = a.min_snr;
    if (a.max_frequency) {
        an["max_frequency"] = *a.max_frequency;
    } else {
        an["max_frequency"] = YAML::Node(YAML::NodeType::Null);
    }
    an["max_peaks"] = a.max_peaks;
    an["dc_guard_bins"] = a.dc_guard_bins;
    an["subbin_refinement"] = a.subbin_refinement;
    an["harmonic_angle_tol_deg"] = a.harmonic_angle_tol_deg;
    an["harmonic_ratio_tol"] = a.harmonic_ratio_tol;

    root["gates"]["max_dphi_deg"] = c.settings.gates.max_dphi_deg;
    root["gates"]["max_dperiod"] = c.settings.gates.max_dperiod;
    root["gates"]["max_gap"] = c.settings.gates.max_gap;

    root["prune"]["min_points"] = c.settings.prune.min_points;
    root["prune"]["min_rel_amplitude"] = c.settings.prune.min_rel_amplitude;
    root["prune"]["min_rel_period"] = c.settings.prune.min_rel_period;

    auto theory = root["theory"];
    theory["visibility_fraction"] = c.settings.spectrum.visibility_fraction;
    theory["grid_order_bound"] = c.settings.spectrum.grid_order_bound;
    theory["barrier_order_bound"] = c.settings.spectrum.barrier_order_bound;
    theory["viewing_distance_mm"] = c.settings.observer.viewing_distance_mm;
    theory["pupil_mm"] = c.settings.observer.mtf.pupil_mm;
    theory["wavelength_nm"] = c.settings.observer.mtf.wavelength_nm;

    auto studies = root["studies"];
    studies["opening_ratios"] = c.studies.opening_ratios;
    studies["or_angles"] = c.studies.or_angles;
    studies["or_grid_pitches"] = c.studies.or_grid_pitches;
    studies["pitches"] = c.studies.pitches;
    studies["pitch_angle"] = c.studies.pitch_angle;

    root["output"]["dir"] = c.output_dir;
    root["output"]["workers"] = c.settings.workers;
    return root;
}

void apply_override(YAML::Node& root, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw Error(fmt::format("override '{}' must look like key.path=value", assignment));
    }
    const std::string path = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);
    std::vector<std::string> keys;
    std::stringstream ss(path);
    for (std::string part; std::getline(ss, part, '.');) {
        if (part.empty()) {
            throw Error(fmt::format("empty key in override '{}'", assignment));
        }
        keys.push_back(part);
    }
    // yaml-cpp nodes are handles; walk with fresh handles so assignment
    // rebinds the child instead of the parent
    std::vector<YAML::Node> chain{root};
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
        YAML::Node child = chain.back()[keys[i]];
        if (!child || child.IsNull()) {
            chain.back()[keys[i]] = YAML::Node(YAML::NodeType::Map);
            child = chain.back()[keys[i]];
        }
        chain.push_back(child);
    }
    chain.back()[keys.back()] = YAML::Load(value);
}

nlohmann::json grating_to_json(const GratingSpec& g) {
    return {{"kind", to_string(g.kind)},
            {"pitch", g.pitch},
            {"opening_ratio", g.opening_ratio},
            {"phase", {g.phase[0], g.phase[1]}}};
}

GratingSpec grating_from_json(const nlohmann::json& j) {
    GratingSpec g;
    g.kind = grating_kind_from_string(j.at("kind").get<std::string>());
    g.pitch = j.at("pitch").get<double>();
    g.opening_ratio = j.at("opening_ratio").get<double>();
    const auto ph = j.at("phase").get<std::vector<double>>();
    g.phase = {ph.at(0), ph.size() > 1 ? ph[1] : 0.0};
    g.validate();
    return g;
}

nlohmann::json scene_to_json(const SceneConfig& s) {
    return {{"grid", grating_to_json(s.grid)},
            {"barrier", grating_to_json(s.barrier)},
            {"alpha_deg", s.alpha_deg},
            {"extent_mm", s.extent_mm},
            {"resolution", s.resolution},
            {"supersample", s.supersample},
            {"seed", s.seed}};
}

SceneConfig scene_from_json(const nlohmann::json& j) {
    SceneConfig s;
    try {
        s.grid = grating_from_json(j.at("grid"));
        s.barrier = grating_from_json(j.at("barrier"));
        s.alpha_deg = j.at("alpha_deg").get<double>();
        s.extent_mm = j.at("extent_mm").get<double>();
        s.resolution = j.at("resolution").get<double>();
        s.supersample = j.at("supersample").get<int>();
        s.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(fmt::format("malformed scene record: {}", e.what()));
    }
    s.validate();
    return s;
}

nlohmann::json dataset_to_json(const SweepDataset& ds) {
    ExperimentConfig cfg;
    cfg.scene = ds.scene;
    cfg.plan = ds.plan;
    cfg.settings = ds.settings;
    YAML::Emitter em;
    em.SetDoublePrecision(17);
    em << config_to_yaml(cfg);

    nlohmann::json j;
    j["config_yaml"] = em.c_str();
    j["calibration"] = {{"white", ds.calibration.white_level}, {"black", ds.calibration.black_level}};
    auto& records = j["records"] = nlohmann::json::array();
    for (const auto& r : ds.records) {
        nlohmann::json rec;
        rec["alpha_deg"] = r.alpha_deg;
        rec["measurements"] = nlohmann::json::array();
        for (const auto& w : r.measurements) {
            rec["measurements"].push_back(wave_to_json(w));
        }
        rec["branch_ids"] = r.branch_ids;
        rec["predictions"] = nlohmann::json::array();
        for (const auto& p : r.predictions) {
            rec["predictions"].push_back(peak_to_json(p));
        }
        records.push_back(std::move(rec));
    }
    auto& branches = j["branches"] = nlohmann::json::array();
    for (const auto& b : ds.branches) {
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& p : b.points) {
            pts.push_back({p.step, p.source});
        }
        branches.push_back({{"id", b.id}, {"points", pts}});
    }
    return j;
}

SweepDataset dataset_from_json(const nlohmann::json& j) {
    SweepDataset ds;
    try {
        const ExperimentConfig cfg = config_from_yaml(YAML::Load(j.at("config_yaml").get<std::string>()));
        ds.scene = cfg.scene;
        ds.plan = cfg.plan;
        ds.settings = cfg.settings;
        ds.calibration = {j.at("calibration").at("white").get<double>(), j.at("calibration").at("black").get<double>()};
        for (const auto& rj : j.at("records")) {
            AngleRecord r;
            r.alpha_deg = rj.at("alpha_deg").get<double>();
            for (const auto& w : rj.at("measurements")) {
                r.measurements.push_back(wave_from_json(w));
            }
            r.branch_ids = rj.at("branch_ids").get<std::vector<int>>();
            for (const auto& p : rj.at("predictions")) {
                r.predictions.push_back(peak_from_json(p));
            }
            ds.records.push_back(std::move(r));
        }
        for (const auto& bj : j.at("branches")) {
            Branch b;
            b.id = bj.at("id").get<int>();
            for (const auto& pj : bj.at("points")) {
                const auto step = pj.at(0).get<std::size_t>();
                const auto source = pj.at(1).get<std::size_t>();
                const auto& rec = ds.records.at(step);
                b.points.push_back({rec.alpha_deg, rec.measurements.at(source), step, source});
            }
            b.update_extrema();
            ds.branches.push_back(std::move(b));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(fmt::format("malformed dataset: {}", e.what()));
    } catch (const std::out_of_range& e) {
        throw Error(fmt::format("dataset references a missing measurement: {}", e.what()));
    }
    return ds;
}

void save_dataset(const std::filesystem::path& path, const SweepDataset& ds) {
    std::ofstream out(path);
    if (!out) {
        throw Error(fmt::format("cannot write dataset '{}'", path.string()));
    }
    out << dataset_to_json(ds).dump(1) << '\n';
}

SweepDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(fmt::format("cannot open dataset '{}'", path.string()));
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(fmt::format("cannot parse dataset '{}': {}", path.string(), e.what()));
    }
    return dataset_from_json(j);
}

}  // namespace moire
