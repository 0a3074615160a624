// nutrirec: operator entry point.
//
//   nutrirec build-vocab | train | eval | gradcheck | serve | chat | scenario
//
// Every flag can also come from a config file (--config, INI/TOML) and the
// common ones from NUTRIREC_* environment variables; flags win.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "nutrirec/evaluation.hpp"
#include "nutrirec/http_server.hpp"
#include "nutrirec/scenario.hpp"
#include "nutrirec/synthetic_corpus.hpp"
#include "nutrirec/version.hpp"

namespace {

using namespace nutrirec;

struct Options {
    std::string data_dir = "data";
    std::string profiles;
    std::string model;
    std::string corpus;
    std::string vocab_out = "vocab.tsv";
    std::string model_out = "model.ckpt";
    std::string listen = "127.0.0.1:8080";
    std::string session = "cli";
    std::string mode = "online";
    std::string scenario;
    std::uint64_t seed = 7;
    std::size_t epochs = 20;
    std::size_t batch = 32;
    std::size_t vocab_size = kDefaultVocabSize;
    std::size_t synthetic_count = 1000;
    std::size_t coords = 200;
    std::size_t top_k = 3;
    double lr = 0.01;
    double alpha = kDefaultAlpha;
    double val_ratio = 0.8;
    double step = 1e-5;
    bool strict = false;
};

std::vector<LabeledRecipeText> corpus_from(const Options& o) {
    return o.corpus.empty() ? make_synthetic_corpus(o.synthetic_count, o.seed) : load_corpus(o.corpus);
}

int cmd_build_vocab(const Options& o) {
    const auto vocab = build_vocabulary(corpus_token_sequences(corpus_from(o)), o.vocab_size);
    save_vocabulary(o.vocab_out, vocab);
    std::cout << "wrote " << vocab.size() << " entries to " << o.vocab_out << '\n';
    return 0;
}

int cmd_train(const Options& o) {
    const auto corpus = corpus_from(o);
    const auto split = train_val_split(corpus, o.val_ratio, o.seed, [](const LabeledRecipeText& r) { return r.label; });
    const auto vocab = build_vocabulary(corpus_token_sequences(split.train), o.vocab_size);

    ModelConfig cfg;
    cfg.vocab_size = o.vocab_size;
    const auto train_set = encode_corpus(split.train, vocab, cfg.seq_len);
    const auto val_set = encode_corpus(split.validation, vocab, cfg.seq_len);

    TrainingConfig tc;
    tc.learning_rate = o.lr;
    tc.epochs = o.epochs;
    tc.batch_size = o.batch;
    tc.seed = o.seed;
    tc.mode = o.mode == "batch" ? TrainingMode::Batch : TrainingMode::Online;

    write_epoch_header(std::cout);
    auto result = train(init_params(cfg, o.seed), train_set, val_set, tc,
                        [](const EpochStats& s) { write_epoch_row(std::cout, s); std::cout.flush(); });

    std::ofstream out(o.model_out, std::ios::binary);
    if (!out) throw LoadError("cannot write " + o.model_out);
    save_checkpoint(out, result.params, vocab);
    std::cerr << "saved checkpoint to " << o.model_out << '\n';
    return 0;
}

Checkpoint read_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open model " + path);
    return load_checkpoint(in);
}

int cmd_eval(const Options& o) {
    if (o.model.empty()) throw ValidationError({{"--model", "required"}});
    const auto ckpt = read_model(o.model);
    write_metric_report(std::cout, evaluate_model(ckpt.params, ckpt.vocab, corpus_from(o)));
    return 0;
}

int cmd_gradcheck(const Options& o) {
    const ModelConfig tiny{10, 4, 2, 3, 4};
    const auto params = init_params(tiny, o.seed);
    std::mt19937_64 rng(o.seed);
    std::uniform_int_distribution<TokenId> tok(0, 9);
    LabeledExample ex;
    for (auto* seq : {&ex.input.name_ids, &ex.input.ingr_ids, &ex.input.desc_ids})
        for (int i = 0; i < 4; ++i) seq->push_back(tok(rng));
    ex.label = o.seed % 4;
    const auto res = gradient_check(params, ex, o.step, o.coords, o.seed);
    std::cout << "parameters\t" << params.size() << "\ncoordinates\t" << res.coordinates.size()
              << "\nmax_relative_error\t" << res.max_relative_error << '\n';
    const bool ok = res.max_relative_error < 1e-4;
    std::cout << (ok ? "ok" : "FAILED") << '\n';
    return ok ? 0 : 1;
}

std::unique_ptr<NutritionService> make_service(const Options& o) {
    auto catalog = load_catalog(CatalogPaths::in_directory(o.data_dir), {o.strict});
    auto profiles = std::make_shared<ProfileStore>(o.profiles.empty() ? ProfileStore{} : ProfileStore::open(o.profiles));
    const std::filesystem::path dir(o.data_dir);
    RuleSet rules = std::filesystem::exists(dir / "intent_rules.tsv") ? RuleSet::load((dir / "intent_rules.tsv").string())
                                                                      : default_rules();
    ReplyTemplates replies = std::filesystem::exists(dir / "replies.tsv")
                                 ? ReplyTemplates::load((dir / "replies.tsv").string())
                                 : ReplyTemplates::defaults();
    ServiceConfig cfg;
    cfg.top_k = o.top_k;
    cfg.alpha = o.alpha;
    auto svc = std::make_unique<NutritionService>(std::move(catalog), std::move(profiles), std::move(rules),
                                                  std::move(replies), cfg);
    if (!o.model.empty()) svc->set_classifier(read_model(o.model));
    return svc;
}

int cmd_serve(const Options& o) {
    const auto colon = o.listen.rfind(':');
    if (colon == std::string::npos) throw ValidationError({{"--listen", "expected host:port"}});
    const std::string host = o.listen.substr(0, colon);
    const int port = std::stoi(o.listen.substr(colon + 1));
    auto svc = make_service(o);
    std::cerr << "listening on " << host << ':' << port << '\n';
    if (!serve(*svc, host, port)) throw Error("could not listen on " + o.listen);
    return 0;
}

int cmd_chat(const Options& o) {
    auto svc = make_service(o);
    std::string line;
    while (std::getline(std::cin, line)) {
        if (tsv::trim(line).empty()) continue;
        const auto turn = svc->handle_chat(o.session, line);
        std::cout << "bot: " << turn.reply << '\n';
    }
    return 0;
}

int cmd_scenario(const Options& o) {
    const auto& sc = find_scenario(o.scenario);
    auto svc = make_service(o);
    write_transcript(std::cout, run_scenario(sc.name, *svc));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"Nutrition recommender: classifier training, chat and recommendation service"};
    app.set_version_flag("--version", std::string(kVersion));
    app.set_config("--config", "", "INI/TOML file with flag values");
    app.require_subcommand(1);

    app.add_option("--data-dir", o.data_dir, "Directory with the catalog TSV files")->envname("NUTRIREC_DATA_DIR");
    app.add_option("--seed", o.seed, "Seed for every random choice")->envname("NUTRIREC_SEED");

    auto corpus_opts = [&](CLI::App* sub) {
        sub->add_option("--corpus", o.corpus, "Labeled corpus TSV (default: built-in synthetic corpus)");
        sub->add_option("--synthetic-count", o.synthetic_count, "Size of the synthetic corpus");
    };
    auto service_opts = [&](CLI::App* sub) {
        sub->add_option("--profiles", o.profiles, "Profile store (JSON Lines)")->envname("NUTRIREC_PROFILES");
        sub->add_option("--model", o.model, "Classifier checkpoint for intent fallback")->envname("NUTRIREC_MODEL");
        sub->add_option("--alpha", o.alpha, "Hybrid weight on content score")->check(CLI::Range(0.0, 1.0));
        sub->add_option("--top-k", o.top_k, "Recommendations per reply")->check(CLI::PositiveNumber);
        sub->add_flag("--strict", o.strict, "Treat catalog warnings as errors");
    };

    auto* bv = app.add_subcommand("build-vocab", "Build a vocabulary file from a corpus");
    corpus_opts(bv);
    bv->add_option("--out", o.vocab_out, "Output path");
    bv->add_option("--vocab-size", o.vocab_size, "Maximum entries including PAD/UNK");

    auto* tr = app.add_subcommand("train", "Train the diet classifier; prints per-epoch TSV rows");
    corpus_opts(tr);
    tr->add_option("--epochs", o.epochs, "Training epochs")->check(CLI::PositiveNumber);
    tr->add_option("--lr", o.lr, "SGD learning rate")->check(CLI::PositiveNumber);
    tr->add_option("--batch", o.batch, "Mini-batch size (batch mode)")->check(CLI::PositiveNumber);
    tr->add_option("--mode", o.mode, "online or batch")->check(CLI::IsMember({"online", "batch"}));
    tr->add_option("--train-ratio", o.val_ratio, "Fraction of the corpus used for training")
        ->check(CLI::Range(0.0, 1.0));
    tr->add_option("--vocab-size", o.vocab_size, "Maximum entries including PAD/UNK");
    tr->add_option("--out", o.model_out, "Checkpoint output path");

    auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a corpus");
    corpus_opts(ev);
    ev->add_option("--model", o.model, "Checkpoint to evaluate")->envname("NUTRIREC_MODEL");

    auto* gc = app.add_subcommand("gradcheck", "Finite-difference gradient check on a tiny model");
    gc->add_option("--coordinates", o.coords, "Sampled coordinates")->check(CLI::PositiveNumber);
    gc->add_option("--step", o.step, "Central difference step")->check(CLI::PositiveNumber);

    auto* sv = app.add_subcommand("serve", "Serve the HTTP API");
    service_opts(sv);
    sv->add_option("--listen", o.listen, "host:port")->envname("NUTRIREC_LISTEN");

    auto* ch = app.add_subcommand("chat", "Chat on stdin/stdout");
    service_opts(ch);
    ch->add_option("--session", o.session, "Session / profile id");

    auto* sc = app.add_subcommand("scenario", "Replay a scripted conversation");
    service_opts(sc);
    sc->add_option("name", o.scenario, "Scenario name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*bv) return cmd_build_vocab(o);
        if (*tr) return cmd_train(o);
        if (*ev) return cmd_eval(o);
        if (*gc) return cmd_gradcheck(o);
        if (*sv) return cmd_serve(o);
        if (*ch) return cmd_chat(o);
        if (*sc) return cmd_scenario(o);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
