// Copyright 2026 The popprep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Sandbox {
 public:
  Sandbox() {
    dir_ = fs::temp_directory_path() /
           ("popprep_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Sandbox() { fs::remove_all(dir_); }
  fs::path operator/(const std::string& name) const { return dir_ / name; }

  Run run(const std::string& args) const {
    const auto out = dir_ / "stdout.txt";
    const auto err = dir_ / "stderr.txt";
    const std::string cmd = std::string(POPPREP_CLI_PATH) + " " + args + " >" + out.string() +
                            " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

 private:
  static inline int counter_ = 0;
  fs::path dir_;
};

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

// A model and schedule small enough for a unit test; the field still covers
// the 1-hour window (1 + 7 * 255 = 1786 >= 720 bins).
const char* kSmall =
    "--set model.layers=8 --set model.hidden_channels=4 --set model.mlp_hidden=6 "
    "--set train.max_steps=10 --set train.validate_every=5 --set train.patience=1 "
    "--set train.lr_grid=0.001 --set train.pretrain_lr_grid=0.001 "
    "--set synthetic.horizon=14400 --set tei.pretrain_seconds=7200";

}  // namespace

TEST_CASE("generate: N lines, deterministic bytes, stats CSV") {
  Sandbox box;
  const auto a = box / "a.jsonl";
  const auto b = box / "b.jsonl";
  auto r = box.run("generate --n 25 --seed 7 --out " + a.string());
  REQUIRE(r.code == 0);
  CHECK(r.out.find("25 cascades") != std::string::npos);
  CHECK(r.out.find("seed 7") != std::string::npos);
  CHECK(count_lines(slurp(a)) == 25);
  r = box.run("generate --n 25 --seed 7 --out " + b.string());
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a.string() + ".stats.csv").rfind("metric,value\ncount,25\n", 0) == 0);
}

TEST_CASE("invalid config fails with exit 1 before any work") {
  Sandbox box;
  const auto out = box / "c.jsonl";
  const auto r = box.run("generate --n 10 --branching-alpha 1.2 --out " + out.string());
  CHECK(r.code == 1);
  CHECK(r.err.find("branching_alpha") != std::string::npos);
  CHECK_FALSE(fs::exists(out));
  CHECK(box.run("--set data.nope=1 generate --out " + out.string()).code == 1);
  CHECK(box.run("frobnicate").code == 1);
}

TEST_CASE("missing input file is an IO error, exit 2") {
  Sandbox box;
  const auto r = box.run("pretrain --data /nonexistent.jsonl --out " + (box / "p.ckpt").string());
  CHECK(r.code == 2);
  CHECK(r.err.find("io error") != std::string::npos);
}

TEST_CASE("config echo: --print-config output re-fed gives the same run hash") {
  Sandbox box;
  const auto cfg = box / "cfg.ini";
  const auto r = box.run("--set data.seed=5 --set tei.l_max=6 --print-config generate");
  REQUIRE(r.code == 0);
  std::ofstream(cfg) << r.out;
  const auto again = box.run("--config " + cfg.string() + " --print-config generate");
  CHECK(again.out == r.out);
  const auto data = box / "d.jsonl";
  const auto h1 = box.run("--set data.seed=5 --set tei.l_max=6 generate --n 3 --out " + data.string());
  const auto h2 = box.run("--config " + cfg.string() + " generate --n 3 --out " + data.string());
  CHECK(h1.err.find("run hash") != std::string::npos);
  CHECK(h1.err == h2.err);
}

TEST_CASE("pretrain -> finetune -> evaluate end to end, with argument errors") {
  Sandbox box;
  const std::string data = (box / "d.jsonl").string();
  const std::string small = kSmall;
  REQUIRE(box.run(small + " generate --n 80 --seed 3 --out " + data).code == 0);

  const std::string ckpt = (box / "p.ckpt").string();
  const std::string pairs = (box / "pairs.tsv").string();
  auto r = box.run(small + " pretrain --data " + data + " --out " + ckpt + " --curve " +
                   (box / "curve.csv").string() + " --report " + (box / "r.json").string() +
                   " --dump-pairs " + pairs + " --l-max 2");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("Var(l_e)") != std::string::npos);
  CHECK(slurp(box / "curve.csv").rfind("step,split,loss\n", 0) == 0);
  CHECK(slurp(pairs).rfind("cascade_id\tA\tB\tl_e\n", 0) == 0);
  CHECK(slurp(box / "r.json").find("\"regime\": \"TEI\"") != std::string::npos);

  const std::string results = (box / "results.csv").string();
  r = box.run(small + " finetune --data " + data + " --task T2 --random-init --freeze --results " +
              results);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("TCN-f") != std::string::npos);
  // 80 cascades -> 60 train; ceil(0.01 * eligible) labeled examples.
  CHECK(r.out.find(" labeled train examples of ") != std::string::npos);

  const std::string tuned = (box / "t.ckpt").string();
  r = box.run(small + " finetune --data " + data + " --task T2 --checkpoint " + ckpt +
              " --freeze --label-fraction 0.5 --results " + results + " --out " + tuned);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("PREP-TCN-f") != std::string::npos);
  const std::string csv = slurp(results);
  CHECK(csv.rfind("task,regime,metric,value,n_examples,seed\n", 0) == 0);
  CHECK(count_lines(csv) == 5);  // header + 2 regimes x (MRSE, R-Acc)

  r = box.run(small + " evaluate --data " + data + " --task T2 --checkpoint " + tuned +
              " --regime PREP-TCN-f");
  CHECK(r.code == 0);
  CHECK(r.out.find("T2 MRSE") != std::string::npos);

  CHECK(box.run(small + " finetune --data " + data + " --task T7 --random-init").code == 1);
  r = box.run(small + " finetune --data " + data + " --task T2 --freeze");
  CHECK(r.code == 1);
  CHECK(r.err.find("--checkpoint") != std::string::npos);
  // A checkpoint from a different architecture is a config mismatch.
  r = box.run("finetune --data " + data + " --task T2 --checkpoint " + ckpt);
  CHECK(r.code == 1);
}
