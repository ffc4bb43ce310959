// Copyright 2026 The emoart Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>

namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = new fs::path(fs::temp_directory_path() / ("emoart-cli-" + std::to_string(::getpid())));
    fs::remove_all(*root_);
    fs::create_directories(*root_);
    std::ofstream(*root_ / "run.cfg") << "trunk_width = 4\ncontext_side = 32\nepochs = 1\nbatch_size = 4\n"
                                         "weights_dir = weights\n"
                                         "train_manifest = train/manifest.jsonl\n"
                                         "val_manifest = val/manifest.jsonl\n";
  }
  static void TearDownTestSuite() {
    fs::remove_all(*root_);
    delete root_;
  }

  // Runs the CLI in the scratch directory; returns its exit code.
  static int run(const std::string& args) {
    const std::string cmd = "cd '" + root_->string() + "' && '" EMOART_CLI_PATH "' " + args + " >> cli.log 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  static fs::path root() { return *root_; }
  static fs::path* root_;
};

fs::path* CliTest::root_ = nullptr;

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("no-such-command"), 2);
  EXPECT_EQ(run("evaluate --checkpoint x.ckpt"), 2);
  EXPECT_EQ(run("--device cuda synth -o d"), 2);
  EXPECT_EQ(run("evaluate --checkpoint missing.ckpt --manifest missing.jsonl"), 3);
  EXPECT_EQ(run("stylize --manifest missing.jsonl --styles . -o s --strength 3"), 2);
}

TEST_F(CliTest, EndToEnd) {
  ASSERT_EQ(run("synth -o train --images 8 --size 48"), 0);
  ASSERT_EQ(run("synth -o val --images 6 --size 48 --split val --seed 9"), 0);
  ASSERT_EQ(run("fetch-weights --backbone resnet18 --scheme object_centric --random --width 4"), 0);
  ASSERT_EQ(run("fetch-weights --backbone resnet18 --scheme scene_centric --random --width 4 --seed 1"), 0);
  ASSERT_EQ(run("--config run.cfg --seed 2 train -o run"), 0);
  EXPECT_TRUE(fs::exists(root() / "run" / "best.ckpt"));
  ASSERT_EQ(run("evaluate --checkpoint run/best.ckpt --manifest val/manifest.jsonl -o rep.json"), 0);
  EXPECT_EQ(run("compare rep.json rep.json --json"), 0);
  EXPECT_EQ(run("predict --checkpoint run/best.ckpt --image val/images/synth_00000.png --bbox 2,2,40,40"), 0);
  EXPECT_EQ(run("predict --checkpoint run/best.ckpt --manifest val/manifest.jsonl"), 0);
  fs::create_directories(root() / "styles");
  fs::copy_file(root() / "train" / "images" / "synth_00000.png", root() / "styles" / "a.png");
  EXPECT_EQ(run("--workers 2 stylize --manifest val/manifest.jsonl --styles styles -o val_s --strength 0.5"), 0);
  EXPECT_TRUE(fs::exists(root() / "val_s" / "manifest.jsonl"));
  EXPECT_EQ(run("--config run.cfg ablate --axes INW --eval val_s/manifest.jsonl -o table.json"), 0);
  EXPECT_TRUE(fs::exists(root() / "table.json"));
  EXPECT_EQ(run("--config run.cfg --set epochs=0 train -o bad"), 2);
}

}  // namespace
