#ifndef N2OLAB_N2OLAB_H
#define N2OLAB_N2OLAB_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(N2OLAB_BUILDING)
#define N2O_API __attribute__((visibility("default")))
#else
#define N2O_API
#endif

typedef struct n2o_workspace n2o_workspace;

typedef enum n2o_status {
  N2O_OK = 0,
  N2O_ERR_PARAMETER = 1,
  N2O_ERR_CONFIG = 2,
  N2O_ERR_STRUCTURAL = 3,
  N2O_ERR_SOLVER = 4,
  N2O_ERR_SCHEMA = 5,
  N2O_ERR_IO = 6,
  N2O_ERR_DATA = 7,
  N2O_ERR_INVALID_ARGUMENT = 8, /* null handle, malformed request JSON, unknown command */
  N2O_ERR_INTERNAL = 9
} n2o_status;

typedef void (*n2o_log_fn)(const char* message, void* user);

N2O_API const char* n2o_version(void);
N2O_API const char* n2o_status_name(n2o_status status);

/* Message of the last failed call on this thread; empty when none. */
N2O_API const char* n2o_last_error(void);

/* options_json may be NULL. Keys: data_dir, cache_dir, config, registry,
   seed, jobs, use_cache. */
N2O_API n2o_status n2o_workspace_open(const char* options_json, n2o_workspace** out);
N2O_API void n2o_workspace_close(n2o_workspace* ws);
N2O_API n2o_status n2o_workspace_set_logger(n2o_workspace* ws, n2o_log_fn fn, void* user);

/* Commands: list, simulate, generate-all, metrics, benchmark, noloop-sweep,
   transfer. args_json is a JSON object (NULL for none). On success
   *result_json receives the command's manifest; release it with
   n2o_free_string. */
N2O_API n2o_status n2o_run(n2o_workspace* ws, const char* command, const char* args_json, char** result_json);

N2O_API void n2o_free_string(char* s);

#ifdef __cplusplus
}
#endif

#endif
