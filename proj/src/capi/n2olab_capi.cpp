#include "n2olab/n2olab.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "softsensor/evaluate.hpp"
#include "workflow/commands.hpp"

using namespace n2olab;

struct n2o_workspace {
  std::unique_ptr<workflow::Workspace> ws;
  n2o_log_fn log_fn = nullptr;
  void* log_user = nullptr;
};

namespace {

thread_local std::string g_last_error;

n2o_status status_of(ErrorKind k) {
  switch (k) {
    case ErrorKind::Parameter: return N2O_ERR_PARAMETER;
    case ErrorKind::Configuration: return N2O_ERR_CONFIG;
    case ErrorKind::Structural: return N2O_ERR_STRUCTURAL;
    case ErrorKind::Solver: return N2O_ERR_SOLVER;
    case ErrorKind::Schema: return N2O_ERR_SCHEMA;
    case ErrorKind::Io: return N2O_ERR_IO;
    case ErrorKind::Data: return N2O_ERR_DATA;
  }
  return N2O_ERR_INTERNAL;
}

struct BadRequest : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class Fn>
n2o_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return N2O_OK;
  } catch (const Error& e) {
    g_last_error = std::string(to_string(e.kind())) + ": " + e.what();
    return status_of(e.kind());
  } catch (const BadRequest& e) {
    g_last_error = std::string("request: ") + e.what();
    return N2O_ERR_INVALID_ARGUMENT;
  } catch (const json::exception& e) {
    g_last_error = std::string("request: ") + e.what();
    return N2O_ERR_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    g_last_error = std::string("internal: ") + e.what();
    return N2O_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "internal: unknown exception";
    return N2O_ERR_INTERNAL;
  }
}

json parse_object(const char* text) {
  if (!text || !*text) return json::object();
  json j = json::parse(text);
  if (!j.is_object()) throw BadRequest("expected a JSON object");
  return j;
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

std::vector<soft::Family> families_of(const json& a, std::vector<soft::Family> fallback) {
  if (!a.contains("families")) return fallback;
  std::vector<soft::Family> out;
  for (const auto& f : a.at("families")) out.push_back(soft::parse_family(f.get<std::string>()));
  return out;
}

soft::CvOptions cv_of(const json& a) {
  soft::CvOptions cv;
  read_field(a, "folds", cv.k, "request");
  if (a.contains("fold_mode")) cv.mode = soft::parse_fold_mode(a.at("fold_mode").get<std::string>());
  read_field(a, "fold_seed", cv.fold_seed, "request");
  return cv;
}

std::string out_of(const json& a) {
  if (!a.contains("out")) throw BadRequest("missing 'out'");
  return a.at("out").get<std::string>();
}

json dispatch(workflow::Workspace& ws, const std::string& cmd, const json& a) {
  if (cmd == "list") return workflow::list_simulations(ws);
  if (cmd == "simulate") return workflow::cmd_simulate(ws, a.value("simulation", "baseline"), out_of(a));
  if (cmd == "generate-all") return workflow::cmd_generate_all(ws, out_of(a));
  if (cmd == "metrics")
    return workflow::cmd_metrics(ws, a.value("simulation", "baseline"), out_of(a), a.value("dataset", ""));
  if (cmd == "benchmark") {
    workflow::BenchmarkOptions o;
    read_field(a, "scenarios", o.scenarios, "request");
    read_field(a, "datasets", o.dataset_csvs, "request");
    o.families = families_of(a, o.families);
    o.cv = cv_of(a);
    read_field(a, "importance", o.importance, "request");
    read_field(a, "repeats", o.repeats, "request");
    read_field(a, "importance_rows", o.importance_rows, "request");
    read_field(a, "transfer", o.transfer, "request");
    read_field(a, "transfer_source", o.transfer_source, "request");
    read_field(a, "save_models", o.save_models, "request");
    return workflow::cmd_benchmark(ws, o, out_of(a));
  }
  if (cmd == "noloop-sweep") {
    std::vector<double> k{0.05, 0.01, 0.005, 0.001};
    read_field(a, "k", k, "request");
    return workflow::cmd_noloop_sweep(ws, k, out_of(a));
  }
  if (cmd == "transfer") {
    workflow::TransferOptions o;
    read_field(a, "source", o.source, "request");
    read_field(a, "targets", o.targets, "request");
    o.families = families_of(a, o.families);
    o.cv = cv_of(a);
    o.cv.jobs = ws.options().jobs;
    return workflow::cmd_transfer(ws, o, out_of(a));
  }
  throw BadRequest("unknown command '" + cmd + "'");
}

}  // namespace

extern "C" {

const char* n2o_version(void) { return workflow::kToolVersion; }

const char* n2o_status_name(n2o_status s) {
  switch (s) {
    case N2O_OK: return "ok";
    case N2O_ERR_PARAMETER: return "parameter";
    case N2O_ERR_CONFIG: return "config";
    case N2O_ERR_STRUCTURAL: return "structural";
    case N2O_ERR_SOLVER: return "solver";
    case N2O_ERR_SCHEMA: return "schema";
    case N2O_ERR_IO: return "io";
    case N2O_ERR_DATA: return "data";
    case N2O_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case N2O_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* n2o_last_error(void) { return g_last_error.c_str(); }

n2o_status n2o_workspace_open(const char* options_json, n2o_workspace** out) {
  if (!out) {
    g_last_error = "request: null output pointer";
    return N2O_ERR_INVALID_ARGUMENT;
  }
  *out = nullptr;
  return guarded([&] {
    const json o = parse_object(options_json);
    auto h = std::make_unique<n2o_workspace>();
    workflow::WorkspaceOptions wo;
    read_field(o, "data_dir", wo.data_dir, "options");
    read_field(o, "cache_dir", wo.cache_dir, "options");
    read_field(o, "config", wo.config_path, "options");
    read_field(o, "registry", wo.registry_path, "options");
    read_field(o, "seed", wo.seed, "options");
    read_field(o, "jobs", wo.jobs, "options");
    read_field(o, "use_cache", wo.use_cache, "options");
    auto* raw = h.get();
    wo.log = [raw](const std::string& m) {
      if (raw->log_fn) raw->log_fn(m.c_str(), raw->log_user);
    };
    h->ws = std::make_unique<workflow::Workspace>(std::move(wo));
    *out = h.release();
  });
}

void n2o_workspace_close(n2o_workspace* ws) { delete ws; }

n2o_status n2o_workspace_set_logger(n2o_workspace* ws, n2o_log_fn fn, void* user) {
  if (!ws) {
    g_last_error = "request: null workspace";
    return N2O_ERR_INVALID_ARGUMENT;
  }
  ws->log_fn = fn;
  ws->log_user = user;
  return N2O_OK;
}

n2o_status n2o_run(n2o_workspace* ws, const char* command, const char* args_json, char** result_json) {
  if (!ws || !command || !result_json) {
    g_last_error = "request: null argument";
    return N2O_ERR_INVALID_ARGUMENT;
  }
  *result_json = nullptr;
  return guarded([&] {
    const json a = parse_object(args_json);
    *result_json = dup_string(dispatch(*ws->ws, command, a).dump());
  });
}

void n2o_free_string(char* s) { std::free(s); }

}  // extern "C"
