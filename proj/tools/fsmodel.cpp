// Trace-replay tool and state inspector for the in-memory file-system model.
//
//   fsmodel --trace <file> [--page-size <n>] [--faults <spec>]
//   fsmodel mount --mountpoint <dir> [--page-size <n>] [--faults <spec>]
//
// Fault spec: none | seed:<s>,p:<prob> | script:<file>

#include <csignal>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vfsmodel/faults.hpp"
#include "vfsmodel/trace.hpp"

#ifdef VFSMODEL_HAVE_FUSE
#include "vfsmodel/fusebridge.hpp"

namespace {

vfsmodel::FuseBridge* g_bridge = nullptr;

void handle_signal(int) {
  if (g_bridge) g_bridge->stop();
}

}  // namespace
#endif

int main(int argc, char** argv) {
  CLI::App app{"in-memory VFS/AFS file-system model"};

  std::string trace_file;
  std::string faults_spec = "none";
  std::uint64_t page_size = vfsmodel::kDefaultPageSize;
  std::string dump_format = "text";
  app.add_option("--trace", trace_file, "trace script to replay");
  app.add_option("--page-size", page_size, "page size in bytes")->check(CLI::PositiveNumber);
  app.add_option("--faults", faults_spec, "fault plan: none | seed:<s>,p:<p> | script:<file>");
  app.add_option("--dump-format", dump_format, "state dump format")
      ->check(CLI::IsMember({"text"}));

  std::string mountpoint;
  CLI::App* mount_cmd = app.add_subcommand("mount", "mount the model via FUSE");
  mount_cmd->add_option("--mountpoint", mountpoint, "host directory to mount on")->required();
  mount_cmd->fallthrough();  // --page-size/--faults may follow the subcommand

  CLI11_PARSE(app, argc, argv);

  std::string fault_error;
  auto plan = vfsmodel::FaultPlan::parse(faults_spec, &fault_error);
  if (!plan) {
    std::cerr << "fsmodel: --faults: " << fault_error << "\n";
    return 2;
  }

  if (mount_cmd->parsed()) {
#ifdef VFSMODEL_HAVE_FUSE
    vfsmodel::MountConfig config;
    config.mountpoint = mountpoint;
    config.page_size = page_size;
    config.faults = *plan;
    vfsmodel::FuseBridge bridge(config);
    std::string error;
    if (!bridge.mount(&error)) {
      std::cerr << "fsmodel: " << error << "\n";
      return 1;
    }
    g_bridge = &bridge;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    bridge.serve();
    bridge.stop();
    return 0;
#else
    std::cerr << "fsmodel: FUSE support not built on this platform\n";
    return 1;
#endif
  }

  if (trace_file.empty()) {
    std::cerr << "fsmodel: --trace is required (or use the mount subcommand)\n";
    return 2;
  }
  std::ifstream in(trace_file);
  if (!in) {
    std::cerr << "fsmodel: cannot open trace file " << trace_file << "\n";
    return 2;
  }
  auto result = vfsmodel::run_trace(in, *plan, page_size);
  std::cout << result.transcript;
  if (!result.error.empty()) std::cerr << "fsmodel: " << result.error << "\n";
  return result.exit_code;
}
