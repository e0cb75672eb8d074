// SPDX-License-Identifier: Apache-2.0

#ifndef INFOSPACE_INFOSPACE_H
#define INFOSPACE_INFOSPACE_H

#include <stddef.h>

#if defined(INFOSPACE_BUILDING)
#define INFOSPACE_API __attribute__((visibility("default")))
#else
#define INFOSPACE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum infospace_status {
  INFOSPACE_OK = 0,
  INFOSPACE_ERR_INVALID_ARGUMENT = 1,
  INFOSPACE_ERR_IO = 2,
  INFOSPACE_ERR_CONFIG = 3,
  INFOSPACE_ERR_PARSE = 4,
  INFOSPACE_ERR_TYPE = 5,
  INFOSPACE_ERR_COMPILE = 6,
  INFOSPACE_ERR_DATABASE = 7,
  INFOSPACE_ERR_NOT_FOUND = 8,
  INFOSPACE_ERR_VALIDATION = 9,
  INFOSPACE_ERR_INTERNAL = 10
} infospace_status;

typedef enum infospace_format {
  INFOSPACE_FORMAT_TEXT = 0,    /* aligned columns */
  INFOSPACE_FORMAT_RECORDS = 1, /* one JSON object per row */
  INFOSPACE_FORMAT_JSON = 2     /* columns, rows and truncated flag */
} infospace_format;

typedef struct infospace_domain infospace_domain;
typedef struct infospace_corpus infospace_corpus;
typedef struct infospace_server infospace_server;

/* Message of the last failed call on this thread; empty after a success. */
INFOSPACE_API const char* infospace_last_error(void);
INFOSPACE_API const char* infospace_version(void);
/* Releases strings returned through `char**` out-parameters. */
INFOSPACE_API void infospace_free(char* text);

/* `db_path` may be NULL for operations that only need the labeling. */
INFOSPACE_API infospace_status infospace_domain_open(const char* labeling_path, const char* db_path,
                                                     infospace_domain** out);
INFOSPACE_API void infospace_domain_close(infospace_domain* domain);

/* Compares the labeling with the live schema. `*ok_out` is 1 when they
   agree; `*report_out` lists discrepancies and warnings. */
INFOSPACE_API infospace_status infospace_domain_validate(infospace_domain* domain, char** report_out, int* ok_out);

/* SQL text followed by a `params:` line. */
INFOSPACE_API infospace_status infospace_domain_compile(infospace_domain* domain, const char* plan_text,
                                                        char** out);

/* `row_cap` 0 selects the default cap. */
INFOSPACE_API infospace_status infospace_domain_run(infospace_domain* domain, const char* plan_text,
                                                    infospace_format format, size_t row_cap, char** out);

INFOSPACE_API infospace_status infospace_domain_question(infospace_domain* domain, const char* plan_text,
                                                         char** out);

/* Writes the question corpus to `out_path`; zero caps select the defaults.
   `report_out` (nullable) receives one line per template. */
INFOSPACE_API infospace_status infospace_domain_generate(infospace_domain* domain, const char* out_path,
                                                         size_t max_instances, size_t max_per_template,
                                                         size_t* count_out, char** report_out);

INFOSPACE_API infospace_status infospace_corpus_load(const char* path, infospace_corpus** out);
INFOSPACE_API void infospace_corpus_free(infospace_corpus* corpus);
INFOSPACE_API size_t infospace_corpus_size(const infospace_corpus* corpus);

/* One line per hit: question id, template id and question text separated
   by tabs, best first. */
INFOSPACE_API infospace_status infospace_corpus_search(const infospace_corpus* corpus, const char* query,
                                                       size_t limit, char** out);

/* Canonical plan text of a question; INFOSPACE_ERR_NOT_FOUND when absent. */
INFOSPACE_API infospace_status infospace_corpus_plan(const infospace_corpus* corpus, const char* question_id,
                                                     char** out);

INFOSPACE_API infospace_status infospace_server_create(infospace_server** out);
/* `corpus_path` may be NULL to use the cache beside the labeling. */
INFOSPACE_API infospace_status infospace_server_add_domain(infospace_server* server, const char* labeling_path,
                                                           const char* db_path, const char* corpus_path);
INFOSPACE_API infospace_status infospace_server_set_static_dir(infospace_server* server, const char* dir);
/* Port 0 picks a free port; the bound port is stored in `*port_out`. */
INFOSPACE_API infospace_status infospace_server_bind(infospace_server* server, const char* host, int port,
                                                     int* port_out);
/* Blocks until infospace_server_stop is called from another thread. */
INFOSPACE_API infospace_status infospace_server_listen(infospace_server* server);
INFOSPACE_API void infospace_server_stop(infospace_server* server);
INFOSPACE_API void infospace_server_free(infospace_server* server);

/* Writes every bundled fixture domain (labeling, seed, manifest, database)
   under `out_dir`. `summary_out` (nullable) lists the database paths. */
INFOSPACE_API infospace_status infospace_fixtures_build(const char* out_dir, char** summary_out);

#ifdef __cplusplus
}
#endif

#endif
