// Command-line front end: synth, train-seg, infer, report, pipeline.
// Exit codes: 0 success, 2 usage error, 1 runtime failure. Flags override a
// JSON --config file, which overrides built-in defaults.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cne/pipeline.hpp"

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

nlohmann::json load_config(int argc, char** argv) {
    std::string path;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) {
            path = argv[i + 1];
            break;
        }
        if (a.rfind("--config=", 0) == 0) {
            path = a.substr(9);
            break;
        }
    }
    if (path.empty()) return nlohmann::json::object();
    std::ifstream f(path);
    if (!f) throw UsageError("cannot open config file " + path);
    try {
        nlohmann::json j;
        f >> j;
        if (!j.is_object()) throw UsageError("config file must hold a JSON object");
        return j;
    } catch (const nlohmann::json::parse_error& e) {
        throw UsageError("config file " + path + " is not valid JSON: " + std::string(e.what()));
    }
}

template <typename T>
void from_config(const nlohmann::json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw UsageError(std::string("config key '") + key + "' has the wrong type");
    }
}

void from_config_path(const nlohmann::json& j, const char* key, std::filesystem::path& out) {
    std::string s;
    from_config(j, key, s);
    if (!s.empty()) out = s;
}

void check_unit_interval(double v, const char* flag) {
    if (!(v > 0.0 && v < 1.0))
        throw UsageError(std::string(flag) + " must lie strictly between 0 and 1");
}

// Shared by `synth` and `pipeline`.
void add_synth_flags(CLI::App* cmd, cne::SynthConfig& cfg) {
    cmd->add_option("--scenes", cfg.scenes, "number of scenes to generate");
    cmd->add_option("--size", cfg.height, "image height and width in pixels")
        ->check(CLI::Range(std::size_t{1}, std::size_t{4096}));
    cmd->add_option("--classes", cfg.classes, "land-cover class count")
        ->check(CLI::Range(std::size_t{1}, std::size_t{256}));
    cmd->add_option("--natural-classes", cfg.natural_classes,
                    "class ids planted as naturalness-indicative")
        ->delimiter(',');
    cmd->add_option("--threshold", cfg.natural_threshold,
                    "natural-pixel fraction above which a scene is labeled natural");
    cmd->add_option("--noise-scale", cfg.noise_scale, "blob smoothing radius in pixels");
}

void apply_synth_config(const nlohmann::json& j, cne::SynthConfig& cfg) {
    from_config(j, "scenes", cfg.scenes);
    from_config(j, "size", cfg.height);
    from_config(j, "classes", cfg.classes);
    from_config(j, "natural-classes", cfg.natural_classes);
    from_config(j, "threshold", cfg.natural_threshold);
    from_config(j, "noise-scale", cfg.noise_scale);
}

void add_train_flags(CLI::App* cmd, cne::TrainConfig& train, std::size_t& hidden,
                     double& p_drop) {
    cmd->add_option("--epochs", train.epochs, "training epochs")
        ->check(CLI::Range(std::size_t{1}, std::size_t{1000000}));
    cmd->add_option("--lr", train.learning_rate, "learning rate");
    cmd->add_option("--batch", train.batch_size, "mini-batch size")
        ->check(CLI::Range(std::size_t{1}, std::size_t{1000000}));
    cmd->add_option("--split", train.split, "train fraction of the dataset");
    cmd->add_option("--hidden", hidden, "conv channel width")
        ->check(CLI::Range(std::size_t{1}, std::size_t{1024}));
    cmd->add_option("--pdrop", p_drop, "dropout rate before the classifier");
}

void apply_train_config(const nlohmann::json& j, cne::TrainConfig& train,
                        std::size_t& hidden, double& p_drop) {
    from_config(j, "epochs", train.epochs);
    from_config(j, "lr", train.learning_rate);
    from_config(j, "batch", train.batch_size);
    from_config(j, "split", train.split);
    from_config(j, "hidden", hidden);
    from_config(j, "pdrop", p_drop);
}

void check_train_values(const cne::TrainConfig& train, double p_drop) {
    check_unit_interval(train.split, "--split");
    if (!(p_drop >= 0.0 && p_drop < 1.0)) throw UsageError("--pdrop must lie in [0, 1)");
    if (!(train.learning_rate > 0.0)) throw UsageError("--lr must be > 0");
}

void check_report_values(double l2, double epsilon, double min_coeff) {
    if (l2 < 0.0) throw UsageError("--l2 must be >= 0");
    if (!(epsilon > 0.0)) throw UsageError("--epsilon must be > 0");
    if (min_coeff < 0.0) throw UsageError("--min-coeff must be >= 0");
}

}  // namespace

int main(int argc, char** argv) {
    try {
        const nlohmann::json cfg = load_config(argc, argv);

        CLI::App app{"grey-box naturalness explanation pipeline"};
        app.require_subcommand(1);

        std::string config_path;  // consumed by the pre-scan; bound so CLI11 accepts it
        app.add_option("--config", config_path, "JSON config file with flag defaults");

        // ---- synth ----
        cne::SynthCommand synth;
        synth.config.scenes = 100;
        synth.config.natural_classes = {0, 1};
        apply_synth_config(cfg, synth.config);
        from_config(cfg, "seed", synth.config.seed);
        from_config_path(cfg, "out", synth.out);
        auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic labeled dataset");
        synth_cmd->add_option("--config", config_path, "JSON config file");
        add_synth_flags(synth_cmd, synth.config);
        synth_cmd->add_option("--seed", synth.config.seed, "generator seed");
        synth_cmd->add_option("--out", synth.out, "output dataset directory")
            ->required(synth.out.empty());

        // ---- train-seg ----
        cne::TrainCommand train;
        double train_pdrop = 0.1;
        apply_train_config(cfg, train.train, train.hidden, train_pdrop);
        from_config(cfg, "seed", train.train.seed);
        from_config_path(cfg, "data", train.data);
        from_config_path(cfg, "out", train.out);
        auto* train_cmd = app.add_subcommand("train-seg", "train the per-pixel segmenter");
        train_cmd->add_option("--config", config_path, "JSON config file");
        train_cmd->add_option("--data", train.data, "dataset directory")
            ->required(train.data.empty());
        train_cmd->add_option("--out", train.out, "output directory for model and metrics")
            ->required(train.out.empty());
        add_train_flags(train_cmd, train.train, train.hidden, train_pdrop);
        train_cmd->add_option("--seed", train.train.seed, "training seed");

        // ---- infer ----
        cne::InferCommand infer;
        from_config(cfg, "J", infer.mc_runs);
        from_config(cfg, "seed", infer.seed);
        from_config_path(cfg, "model", infer.model);
        from_config_path(cfg, "data", infer.data);
        from_config_path(cfg, "out", infer.out);
        auto* infer_cmd =
            app.add_subcommand("infer", "per-scene MC predictions and uncertainty maps");
        infer_cmd->add_option("--config", config_path, "JSON config file");
        infer_cmd->add_option("--model", infer.model, "trained model file")
            ->required(infer.model.empty());
        infer_cmd->add_option("--data", infer.data, "dataset directory")
            ->required(infer.data.empty());
        infer_cmd->add_option("--out", infer.out, "output directory")
            ->required(infer.out.empty());
        infer_cmd->add_option("--J", infer.mc_runs, "MC-dropout forward runs")
            ->check(CLI::Range(std::size_t{1}, std::size_t{100000}));
        infer_cmd->add_option("--seed", infer.seed, "MC sampling seed");
        infer_cmd->add_option("--scene", infer.scene_ids, "scene indices (default: all)")
            ->delimiter(',');

        // ---- report ----
        cne::ReportCommand report;
        from_config(cfg, "J", report.mc_runs);
        from_config(cfg, "l2", report.l2);
        from_config(cfg, "epsilon", report.epsilon);
        from_config(cfg, "min-coeff", report.min_coeff);
        from_config(cfg, "ece-bins", report.ece_bins);
        from_config(cfg, "seed", report.seed);
        from_config_path(cfg, "model", report.model);
        from_config_path(cfg, "data", report.data);
        from_config_path(cfg, "out", report.out);
        auto* report_cmd =
            app.add_subcommand("report", "fit the regression and emit the ranked metric");
        report_cmd->add_option("--config", config_path, "JSON config file");
        report_cmd->add_option("--model", report.model, "trained model file")
            ->required(report.model.empty());
        report_cmd->add_option("--data", report.data, "dataset directory")
            ->required(report.data.empty());
        report_cmd->add_option("--out", report.out, "output directory")
            ->required(report.out.empty());
        report_cmd->add_option("--J", report.mc_runs, "MC-dropout forward runs")
            ->check(CLI::Range(std::size_t{1}, std::size_t{100000}));
        report_cmd->add_option("--l2", report.l2, "ridge strength for the logistic regression");
        report_cmd->add_option("--epsilon", report.epsilon, "denominator guard for the metric");
        report_cmd->add_option("--min-coeff", report.min_coeff,
                               "drop patterns whose coefficient falls below this");
        report_cmd->add_option("--ece-bins", report.ece_bins, "calibration bins")
            ->check(CLI::Range(std::size_t{1}, std::size_t{10000}));
        report_cmd->add_option("--seed", report.seed, "MC sampling seed");

        // ---- pipeline ----
        cne::PipelineCommand pipe;
        pipe.config.scenes = 200;
        pipe.config.natural_classes = {0, 1};
        double pipe_pdrop = 0.1;
        apply_synth_config(cfg, pipe.config);
        apply_train_config(cfg, pipe.train, pipe.hidden, pipe_pdrop);
        from_config(cfg, "J", pipe.mc_runs);
        from_config(cfg, "l2", pipe.l2);
        from_config(cfg, "epsilon", pipe.epsilon);
        from_config(cfg, "min-coeff", pipe.min_coeff);
        from_config(cfg, "ece-bins", pipe.ece_bins);
        from_config(cfg, "seed", pipe.seed);
        from_config_path(cfg, "out", pipe.out);
        auto* pipe_cmd = app.add_subcommand(
            "pipeline", "synth, train-seg, infer and report in one seeded run");
        pipe_cmd->add_option("--config", config_path, "JSON config file");
        add_synth_flags(pipe_cmd, pipe.config);
        add_train_flags(pipe_cmd, pipe.train, pipe.hidden, pipe_pdrop);
        pipe_cmd->add_option("--J", pipe.mc_runs, "MC-dropout forward runs")
            ->check(CLI::Range(std::size_t{1}, std::size_t{100000}));
        pipe_cmd->add_option("--l2", pipe.l2, "ridge strength for the logistic regression");
        pipe_cmd->add_option("--epsilon", pipe.epsilon, "denominator guard for the metric");
        pipe_cmd->add_option("--min-coeff", pipe.min_coeff,
                             "drop patterns whose coefficient falls below this");
        pipe_cmd->add_option("--ece-bins", pipe.ece_bins, "calibration bins")
            ->check(CLI::Range(std::size_t{1}, std::size_t{10000}));
        pipe_cmd->add_option("--seed", pipe.seed, "master seed for every stage");
        pipe_cmd->add_option("--out", pipe.out, "output directory")
            ->required(pipe.out.empty());

        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            if (e.get_exit_code() == 0) return app.exit(e);  // --help
            std::cerr << "cne: " << e.what() << "\n";
            return 2;
        }

        if (synth_cmd->parsed()) {
            synth.config.width = synth.config.height;  // --size keeps scenes square
            try {
                cne::validate(synth.config);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            cne::run_synth(synth);
        } else if (train_cmd->parsed()) {
            check_train_values(train.train, train_pdrop);
            train.p_drop = static_cast<float>(train_pdrop);
            cne::run_train(train);
        } else if (infer_cmd->parsed()) {
            cne::run_infer(infer);
        } else if (report_cmd->parsed()) {
            check_report_values(report.l2, report.epsilon, report.min_coeff);
            cne::run_report(report);
        } else if (pipe_cmd->parsed()) {
            pipe.config.width = pipe.config.height;
            try {
                cne::SynthConfig probe = pipe.config;
                probe.seed = pipe.seed;
                cne::validate(probe);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            check_train_values(pipe.train, pipe_pdrop);
            check_report_values(pipe.l2, pipe.epsilon, pipe.min_coeff);
            pipe.p_drop = static_cast<float>(pipe_pdrop);
            cne::run_pipeline(pipe);
        }
        return 0;
    } catch (const UsageError& e) {
        std::cerr << "cne: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "cne: " << e.what() << "\n";
        return 1;
    }
}
