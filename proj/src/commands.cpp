// Copyright 2026 The flowseg authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "flowseg/commands.hpp"

#include "flowseg/core.hpp"
#include "flowseg/eval.hpp"
#include "flowseg/features.hpp"
#include "flowseg/graph.hpp"
#include "flowseg/media_io.hpp"
#include "flowseg/oracle.hpp"
#include "flowseg/solver.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace flowseg::cli {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string get(const KeyValues& opts, const std::string& key, const std::string& fallback) {
    auto it = opts.find(key);
    return it == opts.end() ? fallback : it->second;
}

std::string require(const KeyValues& opts, const std::string& key) {
    auto it = opts.find(key);
    if (it == opts.end()) throw std::invalid_argument("missing required option --" + key);
    return it->second;
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const int parsed = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw std::invalid_argument("option " + key + ": expected an integer, got '" + value + "'");
    }
}

double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double parsed = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw std::invalid_argument("option " + key + ": expected a number, got '" + value + "'");
    }
}

std::uint64_t parse_seed(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const auto parsed = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw std::invalid_argument("option " + key + ": expected a seed, got '" + value + "'");
    }
}

std::vector<std::string> split_csv(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream stream(value);
    std::string token;
    while (std::getline(stream, token, ','))
        if (!token.empty()) out.push_back(token);
    return out;
}

void check_known_keys(const KeyValues& opts, const std::set<std::string>& known) {
    for (const auto& [key, value] : opts)
        if (!known.contains(key))
            throw std::invalid_argument("unknown option '" + key + "'");
}

std::string frame_name(int index, const char* extension) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%05d%s", index, extension);
    return buffer;
}

// Resolved solver configuration plus everything the manifest must record.
struct SegmentSetup {
    solver::SolverConfig config;
    bool deterministic = true;
    std::uint64_t seed = 0;
    std::string init_name = "gaussian";
    double init_sigma_flag = -1.0;  // as requested; resolved per clip
};

SegmentSetup parse_solver_options(const KeyValues& opts) {
    SegmentSetup setup;
    solver::SolverConfig& cfg = setup.config;
    cfg.iterations = parse_int("iterations", get(opts, "iterations", "7"));
    cfg.radius = parse_int("radius", get(opts, "radius", "5"));
    cfg.sigma_k = parse_real("sigma-k", get(opts, "sigma-k", "2.0"));
    cfg.beta = parse_real("beta", get(opts, "beta", "1.0"));
    cfg.chain_steps = parse_int("chain-steps", get(opts, "chain-steps", "5"));
    cfg.threshold = parse_real("threshold", get(opts, "threshold", "0.5"));
    cfg.channels = split_csv(get(opts, "channels", "motion,color"));
    setup.seed = parse_seed("seed", get(opts, "seed", "0"));
    setup.init_name = get(opts, "init", "gaussian");
    setup.init_sigma_flag = parse_real("init-sigma", get(opts, "init-sigma", "-1"));

    if (cfg.iterations < 1) throw std::invalid_argument("iterations must be >= 1");
    if (cfg.radius < 1) throw std::invalid_argument("radius must be >= 1");
    if (cfg.sigma_k <= 0) throw std::invalid_argument("sigma-k must be positive");
    if (cfg.beta <= 0) throw std::invalid_argument("beta must be positive");
    if (cfg.chain_steps < 1) throw std::invalid_argument("chain-steps must be >= 1");
    if (!(cfg.threshold > 0 && cfg.threshold < 1))
        throw std::invalid_argument("threshold must lie in (0, 1)");
    if (cfg.channels.empty()) throw std::invalid_argument("channels must not be empty");

    const std::string regression = get(opts, "regression", "per-frame");
    if (regression == "per-frame") {
        cfg.regression = solver::RegressionMode::per_frame;
    } else if (regression == "global") {
        cfg.regression = solver::RegressionMode::global;
    } else {
        throw std::invalid_argument("regression must be 'per-frame' or 'global'");
    }

    cfg.init.seed = setup.seed;
    cfg.init.sigma = setup.init_sigma_flag;
    if (setup.init_name == "gaussian") {
        cfg.init.kind = solver::InitKind::gaussian;
    } else if (setup.init_name == "uniform") {
        cfg.init.kind = solver::InitKind::uniform;
    } else if (setup.init_name == "random") {
        cfg.init.kind = solver::InitKind::random;
    } else if (setup.init_name == "external") {
        cfg.init.kind = solver::InitKind::external;
    } else {
        throw std::invalid_argument("init must be gaussian, uniform, random or external");
    }

    const std::string deterministic = get(opts, "deterministic", "on");
    if (deterministic == "on") {
        setup.deterministic = true;
        cfg.shards = 1;
    } else if (deterministic == "off") {
        setup.deterministic = false;
        cfg.shards = std::max(1u, std::thread::hardware_concurrency());
    } else {
        throw std::invalid_argument("deterministic must be 'on' or 'off'");
    }
    return setup;
}

const std::set<std::string> kSegmentKeys = {
    "frames", "flow-fwd", "flow-bwd", "out", "iterations", "radius", "sigma-k",
    "beta", "init", "init-sigma", "seed", "regression", "chain-steps", "channels",
    "prob-maps", "threshold", "deterministic", "config"};

const std::set<std::string> kSynthKeys = {
    "out",   "shape",    "size",   "start-x", "start-y", "vel-x", "vel-y",
    "bg-vel-x", "bg-vel-y", "frames", "height",  "width",   "seed",  "config"};

const std::set<std::string> kEvalKeys = {"pred", "gt", "out", "theta", "threshold", "config"};

const std::set<std::string> kOracleKeys = {
    "frames", "flow-fwd", "flow-bwd", "seed", "cap", "iterations", "radius",
    "sigma-k", "beta", "regression", "chain-steps", "channels", "init",
    "init-sigma", "threshold", "deterministic", "config"};

struct LoadedClip {
    io::VideoTensor video;
    io::FlowSet flows;
};

LoadedClip load_clip(const fs::path& frames_dir, const fs::path& fwd_dir,
                     const fs::path& bwd_dir) {
    LoadedClip clip;
    std::vector<fs::path> frame_files = list_files(frames_dir, ".ppm");
    if (frame_files.empty()) frame_files = list_files(frames_dir, ".pgm");
    if (frame_files.size() < 2)
        throw std::runtime_error("need at least 2 frames in " + frames_dir.string());
    clip.video = io::read_frames(frame_files);

    const auto fwd_files = list_files(fwd_dir, ".flo");
    const auto bwd_files = list_files(bwd_dir, ".flo");
    const std::size_t pairs = frame_files.size() - 1;
    if (fwd_files.size() != pairs)
        throw std::runtime_error("expected " + std::to_string(pairs) + " forward flow files in " +
                                 fwd_dir.string() + ", found " + std::to_string(fwd_files.size()));
    if (bwd_files.size() != pairs)
        throw std::runtime_error("expected " + std::to_string(pairs) + " backward flow files in " +
                                 bwd_dir.string() + ", found " + std::to_string(bwd_files.size()));
    for (const auto& file : fwd_files) clip.flows.forward.push_back(io::read_flo(file));
    for (const auto& file : bwd_files) clip.flows.backward.push_back(io::read_flo(file));
    for (const auto* list : {&clip.flows.forward, &clip.flows.backward})
        for (const auto& field : *list)
            if (field.height != clip.video.height || field.width != clip.video.width)
                throw std::runtime_error("flow field dimensions do not match the frames");
    return clip;
}

nlohmann::json config_json(const SegmentSetup& setup, double resolved_sigma) {
    const solver::SolverConfig& cfg = setup.config;
    std::string channels;
    for (std::size_t i = 0; i < cfg.channels.size(); ++i)
        channels += (i ? "," : "") + cfg.channels[i];
    return {
        {"iterations", cfg.iterations},
        {"radius", cfg.radius},
        {"sigma_k", cfg.sigma_k},
        {"beta", cfg.beta},
        {"tol", cfg.tol},
        {"init", setup.init_name},
        {"init_sigma", resolved_sigma},
        {"seed", setup.seed},
        {"regression",
         cfg.regression == solver::RegressionMode::per_frame ? "per-frame" : "global"},
        {"chain_steps", cfg.chain_steps},
        {"channels", channels},
        {"threshold", cfg.threshold},
        {"deterministic", setup.deterministic ? "on" : "off"},
        {"shards", cfg.shards},
    };
}

}  // namespace

KeyValues load_config_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    KeyValues values;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path.string() + ":" + std::to_string(number) +
                                     ": expected key=value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw std::runtime_error(path.string() + ":" + std::to_string(number) + ": empty key");
        values[key] = trim(line.substr(eq + 1));
    }
    return values;
}

KeyValues resolve_options(const KeyValues& cli) {
    KeyValues resolved;
    auto config_it = cli.find("config");
    if (config_it != cli.end()) resolved = load_config_file(config_it->second);
    for (const auto& [key, value] : cli) resolved[key] = value;  // flags win
    resolved.erase("config");
    return resolved;
}

std::vector<fs::path> list_files(const fs::path& dir, const std::string& extension) {
    if (!fs::is_directory(dir)) throw std::runtime_error(dir.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == extension)
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    return files;
}

int run_synth(const KeyValues& cli) {
    try {
        const KeyValues opts = resolve_options(cli);
        check_known_keys(opts, kSynthKeys);
        io::SynthSpec spec;
        spec.frames = parse_int("frames", get(opts, "frames", "8"));
        spec.height = parse_int("height", get(opts, "height", "32"));
        spec.width = parse_int("width", get(opts, "width", "32"));
        spec.size = parse_real("size", get(opts, "size", "8"));
        const std::string shape = get(opts, "shape", "square");
        if (shape == "square") {
            spec.shape = io::SynthSpec::Shape::square;
        } else if (shape == "disc") {
            spec.shape = io::SynthSpec::Shape::disc;
        } else {
            throw std::invalid_argument("shape must be 'square' or 'disc'");
        }
        spec.start_x = parse_real("start-x", get(opts, "start-x", std::to_string(spec.width / 2.0)));
        spec.start_y = parse_real("start-y", get(opts, "start-y", std::to_string(spec.height / 2.0)));
        spec.vel_x = parse_real("vel-x", get(opts, "vel-x", "1"));
        spec.vel_y = parse_real("vel-y", get(opts, "vel-y", "0"));
        spec.bg_vel_x = parse_real("bg-vel-x", get(opts, "bg-vel-x", "-2"));
        spec.bg_vel_y = parse_real("bg-vel-y", get(opts, "bg-vel-y", "0"));
        spec.seed = parse_seed("seed", get(opts, "seed", "0"));
        const fs::path out = require(opts, "out");

        const io::SynthSequence seq = io::synth_sequence(spec);
        fs::create_directories(out / "frames");
        fs::create_directories(out / "flow_fwd");
        fs::create_directories(out / "flow_bwd");
        fs::create_directories(out / "gt");
        for (int t = 0; t < spec.frames; ++t) {
            io::write_frame(seq.video, t, out / "frames" / frame_name(t, ".ppm"));
            io::write_mask_pgm(seq.truth.masks[std::size_t(t)].cast<Real>(),
                               out / "gt" / frame_name(t, ".pgm"));
        }
        for (int t = 0; t + 1 < spec.frames; ++t) {
            io::write_flo(seq.flows.forward[std::size_t(t)],
                          out / "flow_fwd" / frame_name(t, ".flo"));
            io::write_flo(seq.flows.backward[std::size_t(t)],
                          out / "flow_bwd" / frame_name(t, ".flo"));
        }
    } catch (const std::exception& e) {
        std::cerr << "error [synth]: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int run_segment(const KeyValues& cli) {
    const auto t_total = Clock::now();
    std::string stage = "config";
    try {
        const KeyValues opts = resolve_options(cli);
        check_known_keys(opts, kSegmentKeys);
        SegmentSetup setup = parse_solver_options(opts);
        const fs::path frames_dir = require(opts, "frames");
        const fs::path fwd_dir = require(opts, "flow-fwd");
        const fs::path bwd_dir = require(opts, "flow-bwd");
        const fs::path out = require(opts, "out");
        const std::string prob_dir = get(opts, "prob-maps", "");

        stage = "ingest";
        auto t_stage = Clock::now();
        const LoadedClip clip = load_clip(frames_dir, fwd_dir, bwd_dir);
        solver::RunInputs inputs;
        const bool wants_prob =
            std::find(setup.config.channels.begin(), setup.config.channels.end(), "prob") !=
            setup.config.channels.end();
        if (wants_prob || setup.config.init.kind == solver::InitKind::external) {
            if (prob_dir.empty())
                throw std::runtime_error(
                    "--prob-maps is required by the 'prob' channel and by --init external");
            inputs.probability_maps = io::read_probability_maps(
                list_files(prob_dir, ".pgm"), clip.video.frames, clip.video.height,
                clip.video.width);
        }
        if (setup.config.init.kind == solver::InitKind::external)
            setup.config.init.external = inputs.probability_maps;
        const double ingest_s = seconds_since(t_stage);

        stage = "graph";
        t_stage = Clock::now();
        solver::Problem problem;
        problem.frames = clip.video.frames;
        problem.height = clip.video.height;
        problem.width = clip.video.width;
        problem.chains = graph::build_chains(clip.flows);
        problem.edges =
            graph::build_edges(problem.chains, setup.config.radius, setup.config.sigma_k);
        const double graph_s = seconds_since(t_stage);

        stage = "features";
        t_stage = Clock::now();
        problem.feature_matrix =
            solver::build_features(clip.video, clip.flows, problem.chains, setup.config, inputs);
        const double features_s = seconds_since(t_stage);

        stage = "solve";
        t_stage = Clock::now();
        const VectorX x0 = solver::init_mask(setup.config.init, problem.frames, problem.height,
                                             problem.width);
        const solver::RunResult result = solver::iterate(problem, setup.config, x0);
        const VectorX finalized = solver::finalize_mask(result.mask.values);
        const double solve_s = seconds_since(t_stage);

        stage = "write";
        t_stage = Clock::now();
        fs::create_directories(out / "soft");
        fs::create_directories(out / "mask");
        solver::SoftMask final_mask = result.mask;
        final_mask.values = finalized;
        const auto binary = solver::binarize(final_mask, setup.config.threshold);
        for (int t = 0; t < problem.frames; ++t) {
            ArrayXX soft(problem.height, problem.width);
            auto view = final_mask.frame(t);
            for (int y = 0; y < problem.height; ++y)
                for (int x = 0; x < problem.width; ++x) soft(y, x) = view(y, x);
            io::write_mask_pgm(soft, out / "soft" / frame_name(t, ".pgm"));
            io::write_mask_pgm(binary[std::size_t(t)].cast<Real>(),
                               out / "mask" / frame_name(t, ".pgm"));
        }

        const double resolved_sigma = setup.config.init.sigma > 0
                                          ? setup.config.init.sigma
                                          : 0.25 * std::min(problem.height, problem.width);
        nlohmann::json manifest = {
            {"command", "segment"},
            {"inputs",
             {{"frames", frames_dir.string()},
              {"flow_fwd", fwd_dir.string()},
              {"flow_bwd", bwd_dir.string()},
              {"prob_maps", prob_dir}}},
            {"output_dir", out.string()},
            {"config", config_json(setup, resolved_sigma)},
            {"video",
             {{"frames", problem.frames},
              {"height", problem.height},
              {"width", problem.width},
              {"nodes", problem.edges.node_count},
              {"edges", problem.edges.edges.size()}}},
            {"iterations_run", result.mask.iteration},
            {"converged", result.diagnostics.converged},
        };
        const double write_s = seconds_since(t_stage);
        manifest["timings_sec"] = {{"ingest", ingest_s}, {"graph", graph_s},
                                   {"features", features_s}, {"solve", solve_s},
                                   {"write", write_s}, {"total", seconds_since(t_total)}};
        std::ofstream(out / "manifest.json") << manifest.dump(2) << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error [" << stage << "]: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int run_eval(const KeyValues& cli) {
    try {
        const KeyValues opts = resolve_options(cli);
        check_known_keys(opts, kEvalKeys);
        const fs::path pred_dir = require(opts, "pred");
        const fs::path gt_dir = require(opts, "gt");
        const std::string out_dir = get(opts, "out", "");
        const double threshold = parse_real("threshold", get(opts, "threshold", "0.5"));

        const auto pred_files = list_files(pred_dir, ".pgm");
        if (pred_files.empty()) throw std::runtime_error("no predictions in " + pred_dir.string());
        std::vector<MaskArray> preds;
        for (const auto& file : pred_files) {
            const ArrayXX values = io::read_pgm(file);
            preds.push_back(values >= threshold);
        }

        eval::MetricReport report;
        const fs::path boxes_file = gt_dir / "boxes.txt";
        if (fs::exists(boxes_file)) {
            // Box ground truth: one line per frame, "x_min y_min x_max y_max"
            // or "none". Only CorLoc applies.
            std::ifstream in(boxes_file);
            std::vector<std::optional<io::Box>> gt_boxes;
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty() || line[0] == '#') continue;
                if (line == "none") {
                    gt_boxes.push_back(std::nullopt);
                } else {
                    io::Box box;
                    std::istringstream fields(line);
                    if (!(fields >> box.x_min >> box.y_min >> box.x_max >> box.y_max))
                        throw std::runtime_error("malformed line in " + boxes_file.string());
                    if (box.x_min > box.x_max || box.y_min > box.y_max)
                        throw std::runtime_error("degenerate box in " + boxes_file.string());
                    gt_boxes.push_back(box);
                }
            }
            if (gt_boxes.size() != preds.size())
                throw std::runtime_error("box count does not match prediction count");
            std::vector<std::optional<io::Box>> pred_boxes;
            for (const auto& mask : preds) pred_boxes.push_back(eval::mask_to_bbox(mask));
            report.corloc = eval::corloc(pred_boxes, gt_boxes);
        } else {
            const auto gt_files = list_files(gt_dir, ".pgm");
            if (gt_files.size() != pred_files.size())
                throw std::runtime_error("prediction and ground-truth counts differ");
            std::vector<MaskArray> gts;
            for (const auto& file : gt_files) {
                const ArrayXX values = io::read_pgm(file);
                gts.push_back(values >= 0.5);
            }
            const int theta =
                opts.contains("theta")
                    ? parse_int("theta", opts.at("theta"))
                    : eval::default_boundary_tolerance(static_cast<int>(gts.front().rows()),
                                                       static_cast<int>(gts.front().cols()));
            report = eval::evaluate_masks(preds, gts, theta);
        }

        const std::string text = eval::report_text(report);
        std::cout << text;
        if (!out_dir.empty()) {
            fs::create_directories(out_dir);
            std::ofstream(fs::path(out_dir) / "report.txt") << text;
            std::ofstream(fs::path(out_dir) / "report.json") << eval::report_json(report);
        }
    } catch (const std::exception& e) {
        std::cerr << "error [eval]: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

namespace {

struct CheckOutcome {
    std::string name;
    bool pass = false;
    std::string detail;
};

std::vector<MatrixX> collect_blocks(const features::FrameBlocks& blocks) {
    std::vector<MatrixX> out;
    for (int t = 0; t < blocks.frame_count(); ++t) out.emplace_back(blocks.block(t));
    return out;
}

// The dense counterpart of the regression+projection step for the active mode.
MatrixX dense_projection_for_mode(const solver::Problem& problem,
                                  const solver::SolverConfig& config) {
    if (config.regression == solver::RegressionMode::global)
        return oracle::projection(problem.feature_matrix.data, config.beta);
    const features::FrameBlocks blocks = features::frame_blocks(
        problem.feature_matrix, problem.frames, problem.height, problem.width);
    return oracle::projection(oracle::block_diagonal(collect_blocks(blocks)), config.beta);
}

}  // namespace

int run_oracle_check(const KeyValues& cli) {
    try {
        const KeyValues opts = resolve_options(cli);
        check_known_keys(opts, kOracleKeys);
        SegmentSetup setup = parse_solver_options(opts);
        const auto cap = NodeIndex(parse_int("cap", get(opts, "cap", "20000")));
        const std::uint64_t seed = setup.seed;

        io::VideoTensor video;
        io::FlowSet flows;
        if (opts.contains("frames")) {
            const LoadedClip clip = load_clip(require(opts, "frames"), require(opts, "flow-fwd"),
                                              require(opts, "flow-bwd"));
            video = clip.video;
            flows = clip.flows;
        } else {
            io::SynthSpec spec;
            spec.frames = 5;
            spec.height = 8;
            spec.width = 8;
            spec.size = 3;
            spec.start_x = 2.5;
            spec.start_y = 3.5;
            spec.vel_x = 1.0;
            spec.bg_vel_x = -1.0;
            spec.seed = seed;
            const io::SynthSequence seq = io::synth_sequence(spec);
            video = seq.video;
            flows = seq.flows;
        }
        if (video.node_count() > cap) {
            std::cerr << "error [oracle-check]: instance has " << video.node_count()
                      << " nodes, over the cap of " << cap << "\n";
            return 1;
        }

        solver::SolverConfig config = setup.config;
        config.iterations = opts.contains("iterations") ? config.iterations : 50;
        config.tol = 0.0;  // fixed iteration count makes checks comparable
        const solver::Problem problem = solver::build_problem(video, flows, config);
        const MatrixX M = oracle::adjacency(problem.edges, problem.edges.node_count, cap);
        const MatrixX P = dense_projection_for_mode(problem, config);
        const MatrixX A = oracle::iteration_matrix(M, P);
        const VectorX x0 =
            solver::init_mask(config.init, problem.frames, problem.height, problem.width);

        std::vector<CheckOutcome> outcomes;

        {  // One iteration advances the propagated labels exactly by M*P.
            CheckOutcome outcome{"step-equivalence", true, ""};
            VectorX x = x0;
            VectorX previous;
            Real worst = 1.0;
            for (int it = 0; it < 8; ++it) {
                solver::StepResult stepped = solver::step(problem, x, config);
                if (it > 0) {
                    const Real c = cosine(stepped.propagated, A * previous);
                    worst = std::min(worst, c);
                }
                previous = stepped.propagated;
                x = stepped.next;
            }
            outcome.pass = worst >= 1.0 - 1e-8;
            outcome.detail = "worst per-iteration cosine " + std::to_string(worst);
            outcomes.push_back(outcome);
        }

        {  // The converged value dominates random unit probes.
            CheckOutcome outcome{"sampled-dominance", true, ""};
            const oracle::EigenPair pair = oracle::dominant_eigenpair(A, 500, 1e-12);
            const Real value = pair.vector.dot(A * pair.vector);
            RandomSource rng(seed + 1);
            Real margin = std::numeric_limits<Real>::infinity();
            const Eigen::Index n = A.rows();
            for (int probe = 0; probe < 1000; ++probe) {
                VectorX u(n);
                for (Eigen::Index i = 0; i < n; ++i) u[i] = rng.next() - 0.5;
                u.normalize();
                margin = std::min(margin, value - u.dot(A * u));
            }
            outcome.pass = margin >= -1e-9;
            outcome.detail = "worst probe margin " + std::to_string(margin);
            outcomes.push_back(outcome);
        }

        {  // Per-frame regression equals global regression on the block matrix.
            CheckOutcome outcome{"per-frame-block-equivalence", true, ""};
            const features::FrameBlocks blocks = features::frame_blocks(
                problem.feature_matrix, problem.frames, problem.height, problem.width);
            features::FeatureMatrix block_matrix;
            block_matrix.data = oracle::block_diagonal(collect_blocks(blocks));
            block_matrix.standardized = problem.feature_matrix.standardized;
            solver::Problem block_problem = problem;
            block_problem.feature_matrix = std::move(block_matrix);
            solver::SolverConfig per_frame = config;
            per_frame.regression = solver::RegressionMode::per_frame;
            solver::SolverConfig global = config;
            global.regression = solver::RegressionMode::global;
            VectorX xa = x0;
            VectorX xb = x0;
            Real worst = 0.0;
            for (int it = 0; it < 8; ++it) {
                xa = solver::step(problem, xa, per_frame).next;
                xb = solver::step(block_problem, xb, global).next;
                const Real scale = std::max(xa.cwiseAbs().maxCoeff(), Real(1e-30));
                worst = std::max(worst, (xa - xb).cwiseAbs().maxCoeff() / scale);
            }
            outcome.pass = worst <= 1e-8;
            outcome.detail = "worst relative difference " + std::to_string(worst);
            outcomes.push_back(outcome);
        }

        {  // The coupled fixed point is an eigenvector of the coupled matrix.
            CheckOutcome outcome{"coupled-fixed-point", true, ""};
            Real worst = 0.0;
            for (const Real alpha : {0.5, 1.0, 2.0}) {
                for (const Real beta : {0.5, 1.0, 2.0}) {
                    const VectorX x = oracle::coupled_iteration(
                        M, problem.feature_matrix.data, alpha, beta, x0, 1000);
                    const MatrixX coupled =
                        oracle::coupled_matrix(M, problem.feature_matrix.data, alpha, beta);
                    const Real lambda = x.dot(coupled * x);
                    worst = std::max(worst, (coupled * x - lambda * x).norm());
                }
            }
            outcome.pass = worst <= 1e-8;
            outcome.detail = "worst eigen-residual " + std::to_string(worst);
            outcomes.push_back(outcome);
        }

        {  // All admissible starts converge to the same direction.
            CheckOutcome outcome{"init-invariance", true, ""};
            std::vector<VectorX> finals;
            for (const solver::InitKind kind :
                 {solver::InitKind::gaussian, solver::InitKind::uniform,
                  solver::InitKind::random, solver::InitKind::external}) {
                solver::SolverConfig variant = config;
                variant.init.kind = kind;
                variant.init.seed = seed + 2;
                if (kind == solver::InitKind::external) {
                    // Any nonnegative per-frame field with mass works here.
                    std::vector<ArrayXX> fields;
                    RandomSource rng(seed + 3);
                    for (int t = 0; t < problem.frames; ++t) {
                        ArrayXX field(problem.height, problem.width);
                        for (int y = 0; y < problem.height; ++y)
                            for (int x = 0; x < problem.width; ++x)
                                field(y, x) = 0.05 + 0.95 * rng.next();
                        fields.push_back(std::move(field));
                    }
                    variant.init.external = std::move(fields);
                }
                const VectorX start = solver::init_mask(variant.init, problem.frames,
                                                        problem.height, problem.width);
                finals.push_back(solver::iterate(problem, variant, start).mask.values);
            }
            Real worst = 1.0;
            for (std::size_t a = 0; a < finals.size(); ++a)
                for (std::size_t b = a + 1; b < finals.size(); ++b)
                    worst = std::min(worst, std::abs(cosine(finals[a], finals[b])));
            outcome.pass = worst >= 1.0 - 1e-4;
            outcome.detail = "worst pairwise |cosine| " + std::to_string(worst);
            outcomes.push_back(outcome);
        }

        bool all_pass = true;
        for (const auto& outcome : outcomes) {
            std::cout << (outcome.pass ? "[PASS] " : "[FAIL] ") << outcome.name << ": "
                      << outcome.detail << "\n";
            all_pass = all_pass && outcome.pass;
        }
        return all_pass ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error [oracle-check]: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace flowseg::cli
