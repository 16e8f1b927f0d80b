// End-to-end exercise of the command line tool. Takes the binary path as
// argv[1] (or UQX_BIN) and drives every subcommand through a scratch
// directory, checking exit codes and emitted artifacts.

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::string g_bin;
std::string g_tmp;

void check(bool ok, const std::string& what) {
    std::printf("%s - %s\n", ok ? "ok" : "FAIL", what.c_str());
    if (!ok) ++g_failures;
}

std::string path(const std::string& leaf) { return g_tmp + "/" + leaf; }

std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in.good()) return "";
    return std::string(std::istreambuf_iterator<char>(in), {});
}

void spit(const std::string& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
}

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

Result run(const std::string& args) {
    const std::string out_path = path("stdout.txt"), err_path = path("stderr.txt");
    const std::string cmd = g_bin + " " + args + " > " + out_path + " 2> " + err_path;
    const int raw = std::system(cmd.c_str());
    Result r;
    if (raw != -1 && WIFEXITED(raw)) r.code = WEXITSTATUS(raw);
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    return r;
}

bool exists(const std::string& p) { return fs::exists(p); }

// Six-cube all-zero mask bundle, written by hand.
void write_zero_mask(const std::string& base) {
    spit(base + ".json",
         R"({"dims": [6, 6, 6], "spacing_mm": [1.0, 1.0, 1.0], "dtype": "u8",)"
         R"( "order": "x-fastest", "byte_order": "little"})");
    spit(base + ".raw", std::string(216, '\0'));
}

const char* kSpec = R"({
  "dataset_id": "cli",
  "seed": 11,
  "n_subjects": 5,
  "dims": [40, 40, 40],
  "lesions_per_subject": [2, 3],
  "axis_mm": [2.0, 3.5],
  "ensemble_size": 3,
  "disagreement": {"c_sv": 0.3, "c_gm": 0.1, "noise": 0.05}
})";

const char* kFitConfig = R"({
  "roles": {"train": {"features": "feats.csv"}},
  "weights": "uniform",
  "seeds": [1, 2],
  "grid": {"alphas": [0.01, 1.0], "rhos": [0.5], "tols": [1e-4]}
})";

std::string pipeline_config(const std::string& out_dir) {
    return std::string(R"({
  "roles": {"train": {"manifest": "cohort/manifest.json"},
            "test_in": {"manifest": "cohort/manifest.json"}},
  "seeds": [1, 2],
  "grid": {"alphas": [0.01, 1.0], "rhos": [0.5], "tols": [1e-4]},
  "out_dir": ")") +
           out_dir + "\"\n}";
}

} // namespace

int main(int argc, char** argv) {
    if (argc > 1) {
        g_bin = argv[1];
    } else if (const char* env = std::getenv("UQX_BIN")) {
        g_bin = env;
    }
    if (g_bin.empty()) {
        std::fprintf(stderr, "usage: uqx_cli_test <path-to-uqx-binary>\n");
        return 2;
    }

    g_tmp = (fs::temp_directory_path() / "uqx_tests" / "cli").string();
    fs::remove_all(g_tmp);
    fs::create_directories(g_tmp);

    {
        const Result r = run("--version");
        check(r.code == 0, "--version exits 0");
        check(r.out.find("1.0.0") != std::string::npos, "--version prints the version");
    }
    {
        check(run("").code == 2, "missing subcommand exits 2");
        check(run("frobnicate").code == 2, "unknown subcommand exits 2");
        check(run("metrics --pred a").code == 2, "missing required option exits 2");
    }

    spit(path("spec.json"), kSpec);
    {
        const Result r = run("synth --spec " + path("spec.json") + " --out " + path("cohort"));
        check(r.code == 0, "synth exits 0");
        check(r.out.find("cohort written to") != std::string::npos, "synth reports the output");
        check(exists(path("cohort/manifest.json")), "synth writes the manifest");

        const Result again = run("synth --spec " + path("spec.json") + " --out " +
                                 path("cohort99") + " --seed 99");
        check(again.code == 0, "synth with a seed override exits 0");
        check(slurp(path("cohort99/s000/gt.raw")) != slurp(path("cohort/s000/gt.raw")),
              "seed override changes the cohort");

        const Result bad = run("synth --spec " + path("nope.json") + " --out " + path("x"));
        check(bad.code == 2, "synth with a missing spec exits 2");
        check(bad.err.find("error:") != std::string::npos, "failures go to stderr");
    }

    {
        const std::string gt = path("cohort/s000/gt");
        const Result r = run("metrics --pred " + gt + " --gt " + gt);
        check(r.code == 0, "metrics exits 0");
        const nlohmann::json j = nlohmann::json::parse(r.out, nullptr, false);
        check(!j.is_discarded(), "metrics emits JSON on stdout");
        check(j.at("dsc").get<double>() == 1.0, "self comparison scores dsc 1");

        const Result to_file =
            run("metrics --pred " + gt + " --gt " + gt + " --out " + path("metrics.json"));
        check(to_file.code == 0 && to_file.out.empty(), "--out silences stdout");
        check(!nlohmann::json::parse(slurp(path("metrics.json")), nullptr, false).is_discarded(),
              "--out writes the JSON file");

        write_zero_mask(path("zeros"));
        const Result degenerate =
            run("metrics --pred " + path("zeros") + " --gt " + path("zeros"));
        check(degenerate.code == 3, "metrics with an empty ground truth exits 3");
        check(degenerate.err.find("error:") != std::string::npos,
              "numeric failures go to stderr");

        check(run("metrics --pred " + path("nope") + " --gt " + gt).code == 2,
              "metrics with a missing mask exits 2");
    }

    {
        const std::string m = path("cohort/s000/member_");
        const Result r = run("lsu --member " + m + "0 --member " + m + "1 --member " + m + "2");
        check(r.code == 0, "lsu exits 0");
        check(r.out.rfind("lesion_id,voxels,lsu\n", 0) == 0, "lsu prints the CSV header");

        check(run("lsu --member " + m + "0").code == 2, "lsu with one member exits 2");
        check(run("lsu --member " + m + "0 --member " + m + "1 --tau 1.5").code == 2,
              "lsu with an out-of-range tau exits 2");
    }

    {
        const Result r = run("features --manifest " + path("cohort/manifest.json") +
                             " --out " + path("feats.csv"));
        check(r.code == 0, "features exits 0");
        const std::string head = slurp(path("feats.csv")).substr(0, 4096);
        check(head.rfind("dataset_id,subject_id,lesion_id,", 0) == 0,
              "feature table starts with the id columns");
        check(head.find("lesion__shape__volume_mm3") != std::string::npos,
              "feature table contains shape columns");

        check(run("features --manifest " + path("nope.json")).code == 2,
              "features with a missing manifest exits 2");
    }

    {
        const Result r = run("novelty --train " + path("feats.csv") + " --target " +
                             path("feats.csv") + " --out " + path("aug.csv"));
        check(r.code == 0, "novelty exits 0");
        const std::string head = slurp(path("aug.csv")).substr(0, 8192);
        check(head.find("lesion__novelty__mahalanobis") != std::string::npos &&
                  head.find("lesion__novelty__smallest_distance") != std::string::npos,
              "novelty appends both columns");

        check(run("novelty --train " + path("nope.csv") + " --target " + path("feats.csv"))
                      .code == 2,
              "novelty with a missing train table exits 2");
    }

    {
        spit(path("fitcfg.json"), kFitConfig);
        const Result r = run("fit --table " + path("aug.csv") + " --config " +
                             path("fitcfg.json") + " --out " + path("fit.json"));
        check(r.code == 0, "fit exits 0");
        const nlohmann::json j =
            nlohmann::json::parse(slurp(path("fit.json")), nullptr, false);
        check(!j.is_discarded() && j.contains("importances") && !j["importances"].empty(),
              "fit writes an importance report");

        spit(path("flat.csv"), "dataset_id,subject_id,lesion_id,a,lsu\n"
                               "d,s0,1,3.0,0.1\n"
                               "d,s1,1,3.0,0.2\n"
                               "d,s2,1,3.0,0.3\n"
                               "d,s3,1,3.0,0.4\n");
        check(run("fit --table " + path("flat.csv")).code == 3,
              "fit on a degenerate table exits 3");
        check(run("fit --table " + path("nope.csv")).code == 2,
              "fit with a missing table exits 2");
    }

    {
        spit(path("run.json"), pipeline_config("out_explain"));
        const Result r = run("explain --config " + path("run.json"));
        check(r.code == 0, "explain exits 0");
        check(r.out.find("pipeline artifacts written") != std::string::npos,
              "explain reports success");
        for (const char* f : {"out_explain/features_train.csv",
                              "out_explain/importance_train.json",
                              "out_explain/transfer_matrix.json", "out_explain/summary.txt"})
            check(exists(path(f)), std::string("explain writes ") + f);

        check(run("explain --config " + path("nope.json")).code == 2,
              "explain with a missing config exits 2");
    }

    {
        spit(path("cross.json"), pipeline_config("out_crossfit"));
        const Result r = run("crossfit --config " + path("cross.json"));
        check(r.code == 0, "crossfit exits 0");
        check(exists(path("out_crossfit/transfer_matrix.json")),
              "crossfit writes the transfer matrix");
        check(!exists(path("out_crossfit/importance_train.json")),
              "crossfit skips the importance reports");
    }

    {
        std::string header = slurp(path("feats.csv"));
        header = header.substr(0, header.find('\n') + 1);
        spit(path("empty.csv"), header);
        spit(path("run_empty.json"), R"({
  "roles": {"train": {"features": "feats.csv"}, "test_out": {"features": "empty.csv"}},
  "weights": "uniform",
  "novelty": false,
  "seeds": [1],
  "grid": {"alphas": [0.01], "rhos": [0.5], "tols": [1e-4]},
  "out_dir": "out_empty"
})");
        const Result r = run("explain --config " + path("run_empty.json"));
        check(r.code == 0, "explain with an empty role still exits 0");
        check(r.out.find("produced no lesions") != std::string::npos,
              "explain warns about the empty role");
        check(exists(path("out_empty/features_test_out.csv")) &&
                  !exists(path("out_empty/transfer_matrix.json")),
              "empty role downgrades the run to feature dumps");
    }

    if (g_failures == 0) {
        std::printf("all cli checks passed\n");
        return 0;
    }
    std::printf("%d cli check(s) failed\n", g_failures);
    return 1;
}
