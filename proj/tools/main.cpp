// kgval: validate a noisy knowledge graph against a trusted external one by
// training confidence-aware cross-graph embeddings and ranking every triplet
// by its probability of being true.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kgval/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

void add_onoff(CLI::App* app, const std::string& flag, bool& value, const std::string& desc) {
    app->add_option_function<std::string>(
           flag, [&value](const std::string& s) { value = (s == "on"); }, desc)
        ->check(CLI::IsMember({"on", "off"}))
        ->default_str("on");
}

void add_common_model_options(CLI::App* app, kgval::RunConfig& cfg) {
    app->add_option("--model", cfg.model, "Score function: distmult|complex|simple|transe")
        ->check(CLI::IsMember({"distmult", "complex", "simple", "transe"}));
    app->add_option("--dim", cfg.dim, "Embedding dimensionality (32/64/128/256 recommended)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cross-graph knowledge graph validation"};
    app.require_subcommand(1);

    kgval::RunConfig cfg;
    std::string command;

    CLI::App* train = app.add_subcommand("train", "Train embeddings over the two graphs");
    train->set_config("--config", "", "key=value config file; command-line flags win");
    train->add_option("--target", cfg.target, "Target (noisy) KG TSV")
        ->required()
        ->check(CLI::ExistingFile);
    train->add_option("--external", cfg.external, "External (trusted) KG TSV")
        ->check(CLI::ExistingFile);
    train->add_option("--aliases", cfg.aliases, "Alias table TSV (canonical\\talias)")
        ->check(CLI::ExistingFile);
    add_common_model_options(train, cfg);
    train->add_option("--lr", cfg.trainer.learning_rate, "Adam learning rate");
    train->add_option("--batch", cfg.trainer.batch_size, "Mini-batch size over the target KG");
    train->add_option("--epochs", cfg.trainer.epochs, "Training epochs");
    train->add_option("--lambda", cfg.trainer.lambda, "Weight of the external-graph loss");
    train->add_option("--theta", cfg.trainer.theta, "Confidence threshold in [0,1)");
    train->add_option("--l2", cfg.trainer.l2_coeff, "L2 coefficient");
    train->add_option("--neg-conventional", cfg.trainer.neg_conventional,
                      "Conventional negatives per positive");
    add_onoff(train, "--neg-cross", cfg.trainer.neg_cross,
              "Cross-KG negative sampling (relation + entity replacement)");
    add_onoff(train, "--confidence", cfg.trainer.confidence,
              "Confidence weighting on the target loss");
    train->add_option("--confidence-warmup", cfg.trainer.confidence_warmup,
                      "Epochs with confidence fixed to 1");
    train->add_option("--margin", cfg.trainer.margin, "Margin gamma (transe only)");
    train->add_option("--overlap-fraction", cfg.overlap_fraction,
                      "Keep this fraction of discovered overlapping entities")
        ->check(CLI::Range(1e-9, 1.0));
    train->add_option("--external-triplets", cfg.external_triplets,
                      "Subsample the external KG to this many triplets (0 = all)");
    train->add_option("--seed", cfg.seed, "RNG seed");
    train->add_option("--threads", cfg.threads, "Worker threads (1 = fully deterministic)");
    train->add_option("--out", cfg.out, "Checkpoint output path")->required();
    train->add_option("--log", cfg.log, "Training log path (JSON lines; default stdout)");
    train->callback([&] { command = "train"; });

    CLI::App* validate = app.add_subcommand("validate", "Rank a labeled evaluation set");
    validate->set_config("--config");
    validate->add_option("--checkpoint", cfg.checkpoint, "Trained checkpoint")
        ->required()
        ->check(CLI::ExistingFile);
    validate->add_option("--eval", cfg.eval, "Labeled TSV: s\\tr\\to\\t+1|-1")
        ->required()
        ->check(CLI::ExistingFile);
    validate->add_option("--precision-at", cfg.precision_ks, "Precision@K cutoffs");
    validate->add_option("--threads", cfg.threads, "Worker threads for scoring");
    validate->add_option("--out", cfg.out, "Report JSON path (default stdout)");
    validate->callback([&] { command = "validate"; });

    CLI::App* corrupt = app.add_subcommand("corrupt", "Generate a synthetic-error eval set");
    corrupt->set_config("--config");
    corrupt->add_option("--target", cfg.target, "Target KG TSV")
        ->required()
        ->check(CLI::ExistingFile);
    corrupt->add_option("--n", cfg.corrupt_n, "Number of triplets to sample and corrupt")
        ->required();
    corrupt->add_option("--tune-fraction", cfg.tune_fraction,
                        "Fraction split off for hyperparameter tuning");
    corrupt->add_option("--seed", cfg.seed, "RNG seed");
    corrupt->add_option("--out", cfg.out, "Labeled TSV path (also writes .tune/.test)")
        ->required();
    corrupt->callback([&] { command = "corrupt"; });

    CLI::App* bench = app.add_subcommand("bench", "Time triplet scoring at several sizes");
    bench->set_config("--config");
    bench->add_option("--checkpoint", cfg.checkpoint, "Trained checkpoint")
        ->required()
        ->check(CLI::ExistingFile);
    bench->add_option("--sizes", cfg.bench_sizes, "Ascending triplet counts")->required();
    bench->add_option("--reps", cfg.bench_reps, "Timed repetitions per size");
    bench->add_option("--seed", cfg.seed, "RNG seed");
    bench->add_option("--out", cfg.out, "CSV path (default stdout)");
    bench->callback([&] { command = "bench"; });

    CLI::App* check = app.add_subcommand("ingest-check", "Parse inputs and report statistics");
    check->set_config("--config");
    check->add_option("--target", cfg.target, "Target KG TSV")
        ->required()
        ->check(CLI::ExistingFile);
    check->add_option("--external", cfg.external, "External KG TSV")->check(CLI::ExistingFile);
    check->add_option("--aliases", cfg.aliases, "Alias table TSV")->check(CLI::ExistingFile);
    check->add_option("--overlap-fraction", cfg.overlap_fraction,
                      "Keep this fraction of discovered overlapping entities");
    check->add_option("--seed", cfg.seed, "RNG seed");
    check->callback([&] { command = "ingest-check"; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (command == "train") {
            kgval::cmd_train(cfg);
        } else if (command == "validate") {
            kgval::cmd_validate(cfg);
        } else if (command == "corrupt") {
            kgval::cmd_corrupt(cfg);
        } else if (command == "bench") {
            kgval::cmd_bench(cfg);
        } else if (command == "ingest-check") {
            kgval::cmd_ingest_check(cfg);
        }
    } catch (const kgval::ConfigError& e) {
        std::cerr << command << ": config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const kgval::NumericError& e) {
        std::cerr << command << ": numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const kgval::DataError& e) {
        std::cerr << command << ": data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << command << ": error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}
