#include "cne/pipeline.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "cne/logreg.hpp"
#include "cne/render.hpp"
#include "cne/report.hpp"
#include "cne/rng.hpp"
#include "cne/tensor_io.hpp"
#include "cne/uncertainty.hpp"

namespace cne {

void run_synth(const SynthCommand& cmd) {
    const auto samples = synth_generate(cmd.config);
    write_dataset(samples, cmd.config, cmd.out);
}

namespace {

nlohmann::json per_class_json(const std::vector<std::optional<double>>& per_class) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& v : per_class) {
        if (v)
            out.push_back(*v);
        else
            out.push_back(nullptr);
    }
    return out;
}

}  // namespace

void run_train(const TrainCommand& cmd) {
    const Dataset ds = load_dataset(cmd.data);
    if (ds.samples.empty()) throw std::runtime_error("train: dataset has no scenes");
    std::filesystem::create_directories(cmd.out);

    SegModel model = SegModel::init(ds.config.classes, cmd.hidden, cmd.p_drop,
                                    cmd.train.seed);
    const TrainResult result = seg_train(model, ds.samples, cmd.train);
    save_model(model, cmd.out / "model.cnem");

    nlohmann::json metrics = {
        {"train_mean_iou", result.train.mean_iou ? nlohmann::json(*result.train.mean_iou)
                                                 : nlohmann::json(nullptr)},
        {"test_mean_iou", result.test.mean_iou ? nlohmann::json(*result.test.mean_iou)
                                               : nlohmann::json(nullptr)},
        {"per_class_iou_train", per_class_json(result.train.per_class)},
        {"per_class_iou_test", per_class_json(result.test.per_class)},
        {"train_scenes", result.train.scene_count},
        {"test_scenes", result.test.scene_count},
        {"final_train_loss", result.final_loss},
        {"epochs", cmd.train.epochs},
        {"learning_rate", cmd.train.learning_rate},
        {"batch_size", cmd.train.batch_size},
        {"split", cmd.train.split},
        {"p_drop", static_cast<double>(cmd.p_drop)},
        {"hidden", cmd.hidden},
        {"seed", cmd.train.seed},
    };
    std::ofstream f(cmd.out / "seg_metrics.json", std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("train: cannot write seg_metrics.json");
    f << metrics.dump(2) << "\n";
}

void run_infer(const InferCommand& cmd) {
    if (cmd.mc_runs == 0) throw std::runtime_error("infer: J must be >= 1");
    const SegModel model = load_model(cmd.model);
    const Dataset ds = load_dataset(cmd.data);
    std::filesystem::create_directories(cmd.out);

    std::vector<std::size_t> ids = cmd.scene_ids;
    if (ids.empty())
        for (std::size_t i = 0; i < ds.samples.size(); ++i) ids.push_back(i);

    for (std::size_t i : ids) {
        if (i >= ds.samples.size())
            throw std::runtime_error("infer: scene index " + std::to_string(i) +
                                     " out of range");
        const Tensor stack =
            mc_sample(model, ds.samples[i].image, cmd.mc_runs, mix_seed(cmd.seed, i));
        const UncertaintyMaps maps = mc_statistics(stack);
        const std::string stem = "scene_" + std::to_string(i);
        write_ppm(render_class_mask(maps.predicted, model.classes),
                  cmd.out / (stem + "_pred.ppm"));
        write_pgm(render_uncertainty_map(maps.pixel_std), cmd.out / (stem + "_unc.pgm"));
        save_tensor(maps.mean_probs, cmd.out / (stem + "_mean.cnet"));
        save_tensor(maps.std_probs, cmd.out / (stem + "_std.cnet"));
    }
}

void run_report(const ReportCommand& cmd) {
    if (cmd.mc_runs == 0) throw std::runtime_error("report: J must be >= 1");
    const SegModel model = load_model(cmd.model);
    const Dataset ds = load_dataset(cmd.data);
    if (ds.samples.empty()) throw std::runtime_error("report: dataset has no scenes");
    std::filesystem::create_directories(cmd.out);

    const std::size_t H = ds.config.height, W = ds.config.width;

    // White-box half: vectorize each scene's deterministic predicted mask and
    // fit the regression against the scene labels.
    std::vector<PatternVector> features;
    std::vector<int> labels;
    features.reserve(ds.samples.size());
    for (const auto& s : ds.samples) {
        const Tensor probs = seg_forward(model, s.image, false, 0);
        const LabelMask pred = argmax_channel(probs);
        features.push_back(vectorize(one_hot_encode(pred, model.classes)));
        labels.push_back(s.label);
    }
    LogRegOptions opts;
    opts.feature_scale = 1.0 / static_cast<double>(H * W);
    opts.l2 = cmd.l2;
    const LogRegModel logreg = logreg_train(features, labels, opts);
    save_logreg(logreg, cmd.out / "logreg.json");

    // Uncertainty half: per-class MC-dropout spread plus pooled calibration.
    ClassUncertaintyAccumulator acc;
    std::vector<double> confidence;
    std::vector<std::uint8_t> correct;
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        const Tensor stack =
            mc_sample(model, ds.samples[i].image, cmd.mc_runs, mix_seed(cmd.seed, i));
        const UncertaintyMaps maps = mc_statistics(stack);
        acc.add(maps);
        collect_calibration(maps, ds.samples[i].mask, confidence, correct);
    }
    const std::vector<double> u = acc.mean();
    const double ece_value = ece(confidence, correct, cmd.ece_bins);

    ReportMetadata meta;
    meta.mc_runs = cmd.mc_runs;
    meta.p_drop = static_cast<double>(model.p_drop);
    meta.epsilon = cmd.epsilon;
    meta.filter_threshold = cmd.min_coeff;
    meta.ece_bins = cmd.ece_bins;
    meta.ece_value = ece_value;
    meta.l2 = cmd.l2;
    meta.feature_scale = opts.feature_scale;
    meta.seed = cmd.seed;
    meta.dataset_fingerprint = file_fingerprint(cmd.data / "index.json");

    const auto distribution = class_distribution(ds.samples, model.classes);
    const CneReport full =
        build_report(logreg.alpha, u, distribution, ds.class_names, meta);
    emit_report(filter_patterns(full, cmd.min_coeff), cmd.out);
}

void run_pipeline(const PipelineCommand& cmd) {
    SynthCommand synth_cmd;
    synth_cmd.config = cmd.config;
    synth_cmd.config.seed = cmd.seed;
    synth_cmd.out = cmd.out / "dataset";
    run_synth(synth_cmd);

    TrainCommand train_cmd;
    train_cmd.data = synth_cmd.out;
    train_cmd.out = cmd.out / "model";
    train_cmd.train = cmd.train;
    train_cmd.train.seed = cmd.seed;
    train_cmd.hidden = cmd.hidden;
    train_cmd.p_drop = cmd.p_drop;
    run_train(train_cmd);

    InferCommand infer_cmd;
    infer_cmd.model = train_cmd.out / "model.cnem";
    infer_cmd.data = synth_cmd.out;
    infer_cmd.out = cmd.out / "infer";
    infer_cmd.mc_runs = cmd.mc_runs;
    infer_cmd.seed = cmd.seed;
    run_infer(infer_cmd);

    ReportCommand report_cmd;
    report_cmd.model = infer_cmd.model;
    report_cmd.data = synth_cmd.out;
    report_cmd.out = cmd.out / "report";
    report_cmd.mc_runs = cmd.mc_runs;
    report_cmd.seed = cmd.seed;
    report_cmd.l2 = cmd.l2;
    report_cmd.epsilon = cmd.epsilon;
    report_cmd.min_coeff = cmd.min_coeff;
    report_cmd.ece_bins = cmd.ece_bins;
    run_report(report_cmd);
}

}  // namespace cne
