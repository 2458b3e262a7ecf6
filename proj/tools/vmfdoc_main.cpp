#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vmfdoc/baselines.hpp"
#include "vmfdoc/corpus.hpp"
#include "vmfdoc/errors.hpp"
#include "vmfdoc/eval.hpp"
#include "vmfdoc/manifest.hpp"
#include "vmfdoc/model.hpp"

namespace {

using namespace vmfdoc;

int thread_count() {
    const char* env = std::getenv("VMFDOC_THREADS");
    if (!env || !*env) return 1;
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (!end || *end || v < 1) return 1;
    return static_cast<int>(std::min(v, 256L));
}

std::ifstream open_input(const std::string& path, bool binary = false) {
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in) throw Error("cannot open " + path);
    return in;
}

EmbeddingTable load_table(const std::string& path, EmbeddingLoadStats* stats = nullptr) {
    auto in = open_input(path);
    try {
        return load_embeddings(in, stats);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

StopwordSet load_stopword_file(const std::string& path) {
    if (path.empty()) return {};
    auto in = open_input(path);
    return load_stopwords(in);
}

std::vector<RawDoc> load_raw_docs(const std::string& path) {
    auto in = open_input(path);
    try {
        return read_corpus_tsv(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

struct TrainArgs {
    std::string embeddings, corpus, out, stopwords;
    double kappa0 = 1500.0, kappa_n_lo = 1000.0, kappa_n_hi = 1500.0, tol = 1e-5;
    int max_iters = 100;
    std::uint64_t seed = 0;
};

int run_train(const TrainArgs& a) {
    Timer timer;
    EmbeddingLoadStats stats;
    EmbeddingTable table = load_table(a.embeddings, &stats);
    StopwordSet stop = load_stopword_file(a.stopwords);
    auto [corpus, report] = build_corpus(load_raw_docs(a.corpus), table, stop);
    if (!report.dropped_ids.empty())
        std::cerr << "note: " << report.dropped_ids.size()
                  << " document(s) dropped (empty after preprocessing)\n";

    ModelConfig cfg;
    cfg.dim = table.dim;
    cfg.kappa0_init = a.kappa0;
    cfg.kappa_doc_lo = a.kappa_n_lo;
    cfg.kappa_doc_hi = a.kappa_n_hi;
    cfg.max_iters = a.max_iters;
    cfg.tol = a.tol;
    cfg.seed = a.seed;
    auto [model, trace] = fit(corpus, cfg, thread_count());

    std::ostringstream blob(std::ios::binary);
    save_model(blob, model);
    atomic_write_file(a.out, blob.str());

    std::ostringstream log;
    char num[40];
    for (std::size_t i = 0; i < trace.elbo.size(); ++i) {
        double delta = i ? trace.elbo[i] - trace.elbo[i - 1] : 0.0;
        std::snprintf(num, sizeof(num), "%.17g\t%.17g", trace.elbo[i], delta);
        log << i << '\t' << num << '\n';
    }
    atomic_write_file(a.out + ".elbo.tsv", log.str());

    RunManifest manifest;
    manifest.command = "train";
    manifest.config = {{"embeddings", a.embeddings},
                       {"corpus", a.corpus},
                       {"out", a.out},
                       {"stopwords", a.stopwords},
                       {"kappa0", cfg.kappa0_init},
                       {"kappa_n_lo", cfg.kappa_doc_lo},
                       {"kappa_n_hi", cfg.kappa_doc_hi},
                       {"max_iters", cfg.max_iters},
                       {"tol", cfg.tol},
                       {"seed", cfg.seed},
                       {"threads", thread_count()}};
    manifest.input_digests.emplace_back(a.embeddings, file_digest_hex(a.embeddings));
    manifest.input_digests.emplace_back(a.corpus, file_digest_hex(a.corpus));
    if (!a.stopwords.empty())
        manifest.input_digests.emplace_back(a.stopwords, file_digest_hex(a.stopwords));
    manifest.seed = a.seed;
    manifest.wall_seconds = timer.seconds();
    manifest.tool_version = VMFDOC_VERSION;
    write_manifest(a.out + ".manifest.json", manifest);

    std::cout << "trained " << corpus.size() << " documents (dim " << table.dim << ") in "
              << trace.iterations << " iteration(s), "
              << (trace.converged ? "converged" : "iteration limit") << ", final elbo "
              << trace.elbo.back() << '\n';
    return 0;
}

struct InferArgs {
    std::string model, embeddings, corpus, out, stopwords;
    std::string mode = "mean-direction";
};

ReprMode parse_mode(const std::string& mode) {
    return mode == "posterior-expectation" ? ReprMode::PosteriorExpectation
                                           : ReprMode::MeanDirection;
}

int run_infer(const InferArgs& a) {
    Timer timer;
    DocModel model = [&] {
        auto in = open_input(a.model, true);
        return load_model(in);
    }();
    EmbeddingTable table = load_table(a.embeddings);
    if (table.fingerprint != model.embedding_fingerprint)
        throw FingerprintMismatchError(
            "embedding table fingerprint " + fingerprint_hex(table.fingerprint) +
            " does not match the model's " + fingerprint_hex(model.embedding_fingerprint));
    StopwordSet stop = load_stopword_file(a.stopwords);
    std::vector<RawDoc> raw = load_raw_docs(a.corpus);

    ReprMode mode = parse_mode(a.mode);
    ReprFile file;
    file.dim = model.dim();
    std::ostringstream skipped;
    for (const RawDoc& rd : raw) {
        Document doc;
        doc.id = rd.id;
        doc.label = rd.label;
        for (const std::string& word : preprocess(rd.text, stop))
            if (auto idx = table.lookup(word)) doc.tokens.push_back(*idx);
        if (doc.tokens.empty()) {
            skipped << rd.id << "\tempty-after-preprocessing\n";
            continue;
        }
        InferResult state = infer(model, doc, table);
        file.ids.push_back(rd.id);
        file.labels.push_back(rd.label);
        file.X.push_back(doc_repr(state, mode));
    }
    std::ostringstream body;
    write_repr_tsv(body, file);
    atomic_write_file(a.out, body.str());
    atomic_write_file(a.out + ".skipped.tsv", skipped.str());

    RunManifest manifest;
    manifest.command = "infer";
    manifest.config = {{"model", a.model},
                       {"embeddings", a.embeddings},
                       {"corpus", a.corpus},
                       {"out", a.out},
                       {"stopwords", a.stopwords},
                       {"mode", a.mode}};
    manifest.input_digests.emplace_back(a.model, file_digest_hex(a.model));
    manifest.input_digests.emplace_back(a.embeddings, file_digest_hex(a.embeddings));
    manifest.input_digests.emplace_back(a.corpus, file_digest_hex(a.corpus));
    if (!a.stopwords.empty())
        manifest.input_digests.emplace_back(a.stopwords, file_digest_hex(a.stopwords));
    manifest.seed = model.config.seed;
    manifest.wall_seconds = timer.seconds();
    manifest.tool_version = VMFDOC_VERSION;
    write_manifest(a.out + ".manifest.json", manifest);

    std::cout << "inferred " << file.ids.size() << " document(s), skipped "
              << (raw.size() - file.ids.size()) << '\n';
    return 0;
}

struct EvalArgs {
    std::string repr, train, test, out;
    int folds = 10;
    std::uint64_t seed = 0;
    std::string loss = "hinge";
    double l2 = 1e-4, lr0 = 0.5;
    int epochs = 50;
    bool json = false;
};

EvalDataset dataset_from_repr(const ReprFile& file, const std::string& path,
                              const std::map<int, int>& label_map) {
    EvalDataset data;
    for (std::size_t i = 0; i < file.ids.size(); ++i) {
        if (!file.labels[i])
            throw Error(path + ": document " + file.ids[i] + " has no label");
        auto it = label_map.find(*file.labels[i]);
        data.X.push_back(file.X[i]);
        data.y.push_back(it == label_map.end() ? -1 : it->second);
    }
    return data;
}

std::map<int, int> dense_label_map(const ReprFile& file) {
    std::map<int, int> map;
    for (const auto& label : file.labels)
        if (label) map.emplace(*label, 0);
    int next = 0;
    for (auto& [raw, dense] : map) dense = next++;
    return map;
}

int run_eval(const EvalArgs& a) {
    Timer timer;
    ClassifierConfig cfg;
    cfg.loss = a.loss == "logistic" ? Loss::Logistic : Loss::Hinge;
    cfg.l2 = a.l2;
    cfg.epochs = a.epochs;
    cfg.lr0 = a.lr0;
    cfg.seed = a.seed;

    nlohmann::ordered_json out_json;
    std::ostringstream out_text;
    if (!a.repr.empty()) {
        auto in = open_input(a.repr);
        ReprFile file = read_repr_tsv(in);
        auto label_map = dense_label_map(file);
        EvalDataset data = dataset_from_repr(file, a.repr, label_map);
        CvResult cv = kfold_cv(data, a.folds, cfg, a.seed);
        for (std::size_t f = 0; f < cv.fold_accuracy.size(); ++f)
            out_text << "fold " << f << ": " << cv.fold_accuracy[f] << '\n';
        out_text << "mean_accuracy: " << cv.mean_accuracy << '\n';
        out_json = {{"folds", a.folds},
                    {"fold_accuracy", cv.fold_accuracy},
                    {"mean_accuracy", cv.mean_accuracy}};
    } else {
        auto train_in = open_input(a.train);
        ReprFile train_file = read_repr_tsv(train_in);
        auto test_in = open_input(a.test);
        ReprFile test_file = read_repr_tsv(test_in);
        auto label_map = dense_label_map(train_file);
        EvalDataset train_data = dataset_from_repr(train_file, a.train, label_map);
        EvalDataset test_data = dataset_from_repr(test_file, a.test, label_map);
        LinearModel model = train_linear(train_data, cfg);
        double acc = accuracy(predict(model, test_data.X), test_data.y);
        out_text << "accuracy: " << acc << '\n';
        out_json = {{"accuracy", acc}};
    }

    std::string report = a.json ? out_json.dump(2) + "\n" : out_text.str();
    if (a.out.empty()) {
        std::cout << report;
    } else {
        atomic_write_file(a.out, report);
        RunManifest manifest;
        manifest.command = "eval";
        manifest.config = {{"repr", a.repr},   {"train", a.train},   {"test", a.test},
                           {"out", a.out},     {"folds", a.folds},   {"seed", a.seed},
                           {"loss", a.loss},   {"l2", a.l2},         {"epochs", a.epochs},
                           {"lr0", a.lr0},     {"json", a.json}};
        for (const std::string& path : {a.repr, a.train, a.test})
            if (!path.empty()) manifest.input_digests.emplace_back(path, file_digest_hex(path));
        manifest.seed = a.seed;
        manifest.wall_seconds = timer.seconds();
        manifest.tool_version = VMFDOC_VERSION;
        write_manifest(a.out + ".manifest.json", manifest);
    }
    return 0;
}

struct ExportArgs {
    std::string embeddings, corpus, out, stopwords;
    std::string method;
    int clusters = 50;
    std::uint64_t seed = 0;
};

int run_export(const ExportArgs& a) {
    Timer timer;
    EmbeddingTable table = load_table(a.embeddings);
    StopwordSet stop = load_stopword_file(a.stopwords);
    auto [corpus, report] = build_corpus(load_raw_docs(a.corpus), table, stop);

    ReprFile file;
    std::ostringstream skipped;
    for (const std::string& id : report.dropped_ids)
        skipped << id << "\tempty-after-preprocessing\n";
    if (a.method == "cbow") {
        for (const Document& doc : corpus.docs) {
            file.ids.push_back(doc.id);
            file.labels.push_back(doc.label);
            file.X.push_back(cbow_vector(doc, table));
        }
        file.dim = table.dim;
    } else {
        std::vector<UnitVector> points;
        std::vector<std::size_t> kept;
        for (std::size_t n = 0; n < corpus.size(); ++n) {
            std::vector<double> v = cbow_vector(corpus.docs[n], table);
            if (norm2(v) <= kZeroNormEps) {
                skipped << corpus.docs[n].id << "\tzero-average-vector\n";
                continue;
            }
            points.push_back(UnitVector::normalize(v));
            kept.push_back(n);
        }
        if (points.empty()) throw EmptyCorpusError("no document has a usable average vector");
        MovmfConfig cfg;
        cfg.seed = a.seed;
        auto [mix, trace] = movmf_fit(points, a.clusters, cfg);
        for (std::size_t i = 0; i < kept.size(); ++i) {
            const Document& doc = corpus.docs[kept[i]];
            file.ids.push_back(doc.id);
            file.labels.push_back(doc.label);
            file.X.push_back(movmf_assign(mix, points[i]).second);
        }
        file.dim = a.clusters;
    }

    std::ostringstream body;
    write_repr_tsv(body, file);
    atomic_write_file(a.out, body.str());
    atomic_write_file(a.out + ".skipped.tsv", skipped.str());

    RunManifest manifest;
    manifest.command = "export-baseline";
    manifest.config = {{"embeddings", a.embeddings}, {"corpus", a.corpus},
                       {"out", a.out},               {"stopwords", a.stopwords},
                       {"method", a.method},         {"clusters", a.clusters},
                       {"seed", a.seed}};
    manifest.input_digests.emplace_back(a.embeddings, file_digest_hex(a.embeddings));
    manifest.input_digests.emplace_back(a.corpus, file_digest_hex(a.corpus));
    if (!a.stopwords.empty())
        manifest.input_digests.emplace_back(a.stopwords, file_digest_hex(a.stopwords));
    manifest.seed = a.seed;
    manifest.wall_seconds = timer.seconds();
    manifest.tool_version = VMFDOC_VERSION;
    write_manifest(a.out + ".manifest.json", manifest);

    std::cout << "exported " << file.ids.size() << " " << a.method << " representation(s)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"unit-vector document representations over word embeddings"};
    app.require_subcommand(1);

    TrainArgs train_args;
    CLI::App* train = app.add_subcommand("train", "fit a document model on a corpus");
    train->add_option("--embeddings", train_args.embeddings, "word2vec text embeddings")->required();
    train->add_option("--corpus", train_args.corpus, "TSV corpus: id<TAB>label<TAB>text")->required();
    train->add_option("--out", train_args.out, "output model path")->required();
    train->add_option("--stopwords", train_args.stopwords, "stopword list, one word per line");
    train->add_option("--kappa0", train_args.kappa0, "initial prior concentration");
    train->add_option("--kappa-n-lo", train_args.kappa_n_lo, "document concentration range low");
    train->add_option("--kappa-n-hi", train_args.kappa_n_hi, "document concentration range high");
    train->add_option("--max-iters", train_args.max_iters, "EM iteration cap")
        ->check(CLI::PositiveNumber);
    train->add_option("--tol", train_args.tol, "relative bound change for convergence");
    train->add_option("--seed", train_args.seed, "random seed");

    InferArgs infer_args;
    CLI::App* infer = app.add_subcommand("infer", "infer representations for documents");
    infer->add_option("--model", infer_args.model, "trained model path")->required();
    infer->add_option("--embeddings", infer_args.embeddings, "word2vec text embeddings")->required();
    infer->add_option("--corpus", infer_args.corpus, "TSV corpus to infer")->required();
    infer->add_option("--out", infer_args.out, "output representation TSV")->required();
    infer->add_option("--stopwords", infer_args.stopwords, "stopword list");
    infer->add_option("--mode", infer_args.mode, "representation to export")
        ->check(CLI::IsMember({"mean-direction", "posterior-expectation"}));

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "classify representations");
    auto* opt_repr = eval->add_option("--repr", eval_args.repr, "representation TSV for k-fold CV");
    auto* opt_train = eval->add_option("--train", eval_args.train, "training representation TSV");
    auto* opt_test = eval->add_option("--test", eval_args.test, "test representation TSV");
    opt_repr->excludes(opt_train)->excludes(opt_test);
    opt_train->needs(opt_test);
    opt_test->needs(opt_train);
    eval->add_option("--out", eval_args.out, "write the report here instead of stdout");
    eval->add_option("--folds", eval_args.folds, "fold count")->check(CLI::Range(2, 1000000));
    eval->add_option("--seed", eval_args.seed, "random seed");
    eval->add_option("--loss", eval_args.loss, "classifier loss")
        ->check(CLI::IsMember({"hinge", "logistic"}));
    eval->add_option("--l2", eval_args.l2, "ridge penalty");
    eval->add_option("--epochs", eval_args.epochs, "training epochs")->check(CLI::PositiveNumber);
    eval->add_option("--lr0", eval_args.lr0, "initial learning rate");
    eval->add_flag("--json", eval_args.json, "machine-readable report");

    ExportArgs export_args;
    CLI::App* exp = app.add_subcommand("export-baseline", "reference representations");
    exp->add_option("--embeddings", export_args.embeddings, "word2vec text embeddings")->required();
    exp->add_option("--corpus", export_args.corpus, "TSV corpus")->required();
    exp->add_option("--out", export_args.out, "output representation TSV")->required();
    exp->add_option("--method", export_args.method, "cbow or movmf")
        ->required()
        ->check(CLI::IsMember({"cbow", "movmf"}));
    exp->add_option("--clusters", export_args.clusters, "mixture size for movmf")
        ->check(CLI::PositiveNumber);
    exp->add_option("--seed", export_args.seed, "random seed");
    exp->add_option("--stopwords", export_args.stopwords, "stopword list");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (eval->parsed() && eval_args.repr.empty() && eval_args.train.empty()) {
        std::cerr << "eval needs either --repr or --train/--test\n";
        return 2;
    }

    try {
        if (train->parsed()) return run_train(train_args);
        if (infer->parsed()) return run_infer(infer_args);
        if (eval->parsed()) return run_eval(eval_args);
        if (exp->parsed()) return run_export(export_args);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
