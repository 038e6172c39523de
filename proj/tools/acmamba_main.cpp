#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acmamba/commands.hpp"
#include "acmamba/errors.hpp"

using acmamba::RunConfig;

int main(int argc, char** argv) {
    RunConfig cfg;

    // Config file first, so that explicit flags can override its values.
    std::string config_path;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) config_path = argv[i + 1];
        else if (arg.rfind("--config=", 0) == 0) config_path = arg.substr(9);
    }

    try {
        if (!config_path.empty()) acmamba::applyConfigFile(cfg, config_path);

        CLI::App app{"Hyperspectral anomaly detection: region-trained selective "
                     "state-space autoencoder with an RX baseline"};
        app.fallthrough();
        app.require_subcommand(1);

        app.add_option("--config", config_path, "JSON config file (flat keys)");
        app.add_option("--seed", cfg.seed, "RNG seed");
        app.add_option("--out", cfg.out_dir, "output directory");
        app.add_option("--cube", cfg.cube_path, "cube path (HSC1)");
        app.add_option("--mask", cfg.mask_path, "ground-truth mask path (HSC1)");
        app.add_option("--map", cfg.map_path, "detection map path (HSC1)");
        app.add_option("--checkpoint", cfg.checkpoint_path, "model checkpoint path");

        app.add_option("--height", cfg.height, "scene height");
        app.add_option("--width", cfg.width, "scene width");
        app.add_option("--bands", cfg.bands, "scene band count");
        app.add_option("--n-endmembers", cfg.n_endmembers, "background endmembers");
        app.add_option("--n-anomalies", cfg.n_anomalies, "anomaly blob count");
        app.add_option("--anomaly-fraction", cfg.anomaly_fraction,
                       "target anomalous pixel fraction");
        app.add_option("--noise-sigma", cfg.noise_sigma, "additive noise scale");

        app.add_option("--psi", cfg.psi, "compression ratio (pixels per region)");
        app.add_option("--compactness", cfg.compactness, "SLIC spatial weight");
        app.add_option("--slic-iters", cfg.slic_iters, "SLIC iterations");

        app.add_option("--epochs", cfg.epochs, "training epochs");
        app.add_option("--lr", cfg.lr, "learning rate");
        app.add_option("--beta-max", cfg.beta_max, "representative diversity bound");
        app.add_option("--eta", cfg.eta, "difficulty mask rate");
        app.add_option("--norm-k", cfg.norm_k, "reconstruction norm order");
        app.add_option("--weight-decay", cfg.weight_decay, "AdamW weight decay");
        app.add_option("--hidden-dim", cfg.hidden_dim, "autoencoder hidden width");
        app.add_option("--state-dim", cfg.state_dim, "SSM state size");

        app.add_flag("--full-covariance", cfg.full_covariance,
                     "holistic scoring with full covariance");
        app.add_flag("--detail-masked-encoder", cfg.detail_masked_encoder,
                     "detail map through the masked encoder");
        app.add_option("--detail-chunk", cfg.detail_chunk,
                       "detail sequence chunk length (0 = whole image)");

        auto* synth = app.add_subcommand("synth", "write a synthetic cube + mask");
        auto* segment = app.add_subcommand("segment", "write the region map");
        auto* train = app.add_subcommand("train", "train and write a checkpoint");
        auto* detect = app.add_subcommand("detect", "score with a trained checkpoint");
        auto* rx = app.add_subcommand("rx", "RX baseline map + AUC");
        auto* eval = app.add_subcommand("eval", "score a detection map against a mask");
        auto* run = app.add_subcommand("run", "segment, train, detect, evaluate");
        auto* sweep = app.add_subcommand("sweep", "sweep psi, beta, or eta");

        std::string sweep_param;
        std::vector<double> sweep_values;
        sweep->add_option("--param", sweep_param, "psi, beta, or eta")->required();
        sweep->add_option("--values", sweep_values, "values to sweep")->required();

        CLI11_PARSE(app, argc, argv);

        if (synth->parsed()) return acmamba::cmdSynth(cfg);
        if (segment->parsed()) return acmamba::cmdSegment(cfg);
        if (train->parsed()) return acmamba::cmdTrain(cfg);
        if (detect->parsed()) return acmamba::cmdDetect(cfg);
        if (rx->parsed()) return acmamba::cmdRx(cfg);
        if (eval->parsed()) return acmamba::cmdEval(cfg);
        if (run->parsed()) return acmamba::cmdRun(cfg);
        if (sweep->parsed()) return acmamba::cmdSweep(cfg, sweep_param, sweep_values);
        return 1;
    } catch (const acmamba::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
