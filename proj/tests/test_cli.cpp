#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

// end-to-end checks against the installed binary; DOCNER_CLI_PATH comes from
// the build system

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  std::string cmd = std::string(DOCNER_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof(buf), pipe)) {
    r.out.append(buf, n);
  }
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

const char* kTrainText =
    "-DOCSTART- O\n"
    "\n"
    "alpha S-PER\n"
    "visited O\n"
    "acme S-ORG\n"
    "\n"
    "alpha S-PER\n"
    "returned O\n"
    "\n"
    "-DOCSTART- O\n"
    "\n"
    "acme S-ORG\n"
    "hired O\n"
    "beta S-PER\n"
    "\n"
    "beta S-PER\n"
    "accepted O\n"
    "acme S-ORG\n";

const char* kDevText =
    "-DOCSTART- O\n"
    "\n"
    "alpha S-PER\n"
    "visited O\n"
    "zzz O\n"
    "\n"
    "acme S-ORG\n"
    "reopened O\n"
    "\n"
    "-DOCSTART- O\n"
    "\n"
    "beta S-PER\n"
    "joined O\n"
    "acme S-ORG\n";

const char* kConfigText =
    "word_dim = 6\n"
    "char_dim = 3\n"
    "char_hidden = 2\n"
    "word_hidden = 4\n"
    "sent_hidden = 2\n"
    "unc_hidden = 2\n"
    "window = 1\n"
    "mc_passes = 2\n"
    "dropout = 0.2\n"
    "unc_dropout = 0.2\n"
    "batch_sentences = 3\n"
    "max_epochs = 2\n"
    "patience = 10\n"
    "lr = 0.02\n"
    "seed = 11\n";

const std::string kBase = "/tmp/docner_cli_fixture";

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << text;
}

// trains once, later cases reuse the checkpoint
const std::string& trained_checkpoint() {
  static std::string path = [] {
    std::filesystem::remove_all(kBase);
    std::filesystem::create_directories(kBase + "/out");
    write_file(kBase + "/train.conll", kTrainText);
    write_file(kBase + "/dev.conll", kDevText);
    write_file(kBase + "/config.ini", kConfigText);
    RunResult r = run_cli("train --config " + kBase + "/config.ini --train " +
                          kBase + "/train.conll --dev " + kBase +
                          "/dev.conll --out " + kBase + "/out");
    REQUIRE(r.code == 0);
    REQUIRE(r.out.find("epoch 1") != std::string::npos);
    REQUIRE(r.out.find("epoch 2") != std::string::npos);
    REQUIRE(r.out.find("best dev F1") != std::string::npos);
    REQUIRE(r.out.find("checkpoint:") != std::string::npos);
    return kBase + "/out/model.ckpt";
  }();
  return path;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, '\t')) fields.push_back(f);
  return fields;
}

}  // namespace

TEST_CASE("usage errors exit 1, help exits 0") {
  CHECK(run_cli("").code == 1);
  CHECK(run_cli("no-such-command").code == 1);
  CHECK(run_cli("eval").code == 1);  // required options missing
  CHECK(run_cli("grad-check --dims huge").code == 1);

  RunResult help = run_cli("--help");
  CHECK(help.code == 0);
  CHECK(help.out.find("train") != std::string::npos);
  CHECK(help.out.find("predict") != std::string::npos);
}

TEST_CASE("unreadable inputs exit 2") {
  RunResult r = run_cli(
      "train --config /tmp/docner_no_such.ini --train x --dev y --out /tmp/d");
  CHECK(r.code == 2);
  CHECK(r.out.find("error") != std::string::npos);

  CHECK(run_cli("eval --model /tmp/docner_no_such.ckpt --data /tmp/x").code ==
        2);
  CHECK(run_cli("graph-stats --data /tmp/docner_no_such.conll").code == 2);
}

TEST_CASE("training produces a checkpoint and epoch metrics") {
  const std::string& ckpt = trained_checkpoint();
  CHECK(std::filesystem::exists(ckpt));
  REQUIRE(std::filesystem::exists(kBase + "/out/metrics.tsv"));
  std::ifstream metrics(kBase + "/out/metrics.tsv");
  std::string header;
  std::getline(metrics, header);
  CHECK(header == "epoch\ttrain_loss\tdev_p\tdev_r\tdev_f1");
}

TEST_CASE("eval prints the score table for a labeled corpus") {
  RunResult r = run_cli("eval --model " + trained_checkpoint() + " --data " +
                        kBase + "/dev.conll");
  REQUIRE(r.code == 0);
  std::vector<std::string> lines = split_lines(r.out);
  REQUIRE(lines.size() >= 2);
  CHECK(lines[0] == "set\tprecision\trecall\tf1\tgold\tpredicted\tcorrect");
  CHECK(lines[1].rfind("overall\t", 0) == 0);
  std::vector<std::string> overall = split_tabs(lines[1]);
  REQUIRE(overall.size() == 7);
  CHECK(std::stoul(overall[4]) == 4);  // gold mentions in the dev fixture
}

TEST_CASE("predict output lines mirror the input corpus") {
  std::string out_path = kBase + "/pred.tsv";
  RunResult r = run_cli("predict --model " + trained_checkpoint() +
                        " --data " + kBase + "/dev.conll --out " + out_path);
  REQUIRE(r.code == 0);

  std::ifstream in(out_path);
  REQUIRE(in.good());
  std::string line;
  int tokens = 0, blanks = 0;
  std::vector<std::string> surfaces = {"alpha", "visited", "zzz",  "acme",
                                       "reopened", "beta",  "joined", "acme"};
  std::vector<std::string> gold = {"S-PER", "O", "O",     "S-ORG",
                                   "O",     "S-PER", "O", "S-ORG"};
  while (std::getline(in, line)) {
    if (line.empty()) {
      ++blanks;
      continue;
    }
    std::vector<std::string> f = split_tabs(line);
    REQUIRE(f.size() == 3);
    REQUIRE(tokens < int(surfaces.size()));
    CHECK(f[0] == surfaces[tokens]);
    CHECK(f[1] == gold[tokens]);
    CHECK_FALSE(f[2].empty());
    ++tokens;
  }
  CHECK(tokens == 8);
  CHECK(blanks == 3);
}

TEST_CASE("uncertainty columns carry entropies and drop flags") {
  RunResult r = run_cli("predict --model " + trained_checkpoint() +
                        " --data " + kBase +
                        "/dev.conll --emit-uncertainty");
  REQUIRE(r.code == 0);
  int tokens = 0;
  for (const std::string& line : split_lines(r.out)) {
    if (line.empty()) continue;
    std::vector<std::string> f = split_tabs(line);
    REQUIRE(f.size() == 5);
    double entropy = std::stod(f[3]);
    CHECK(entropy >= 0.0);
    CHECK(entropy <= std::log(9.0) + 1e-9);  // 9 output classes
    CHECK((f[4] == "0" || f[4] == "1"));
    ++tokens;
  }
  CHECK(tokens == 8);
}

TEST_CASE("graph stats add up across documents") {
  RunResult r = run_cli("graph-stats --data " + kBase + "/train.conll");
  REQUIRE(r.code == 0);
  std::vector<std::string> lines = split_lines(r.out);
  REQUIRE(lines.size() >= 2);
  CHECK(lines[0] == "doc\ttokens\tnodes\tedges\tconsistency\tdegrees");
  REQUIRE(lines.back().rfind("total\t", 0) == 0);

  std::size_t nodes = 0, edges = 0;
  for (std::size_t i = 1; i + 1 < lines.size(); ++i) {
    std::vector<std::string> f = split_tabs(lines[i]);
    REQUIRE(f.size() >= 5);
    nodes += std::stoul(f[2]);
    edges += std::stoul(f[3]);
    double consistency = std::stod(f[4]);
    CHECK(consistency >= 0.0);
    CHECK(consistency <= 1.0);
  }
  std::vector<std::string> total = split_tabs(lines.back());
  CHECK(std::stoul(total[2]) == nodes);
  CHECK(std::stoul(total[3]) == edges);
}

TEST_CASE("the gradient suite passes under its own tolerance") {
  RunResult r = run_cli("grad-check");
  CHECK(r.code == 0);
  CHECK(r.out.find("max relative error") != std::string::npos);
  CHECK(r.out.find("full_model") != std::string::npos);
}
