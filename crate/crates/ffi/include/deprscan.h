#ifndef DEPRSCAN_H
#define DEPRSCAN_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum DsStatus {
    DS_OK = 0,
    DS_NULL_ARG = 1,
    DS_INVALID_UTF8 = 2,
    DS_IO = 3,
    DS_SYNTAX = 4,
    DS_SCHEMA = 5,
    DS_FORMAT = 6,
    DS_CONFIG = 7,
    DS_PANIC = 8
} DsStatus;

/* Opaque database handle. */
typedef struct DsDb DsDb;

const char *deprscan_version(void);

/* Message for the last failed call on this thread, or NULL. Valid until the
 * next call on the same thread. Do not free. */
const char *deprscan_last_error_message(void);

DsStatus deprscan_db_new(DsDb **out);
DsStatus deprscan_db_load(const char *path, DsDb **out);
DsStatus deprscan_db_save(const DsDb *db, const char *path);
/* Records of a win on duplicate keys. Inputs are not consumed. */
DsStatus deprscan_db_merge(const DsDb *a, const DsDb *b, DsDb **out);
size_t deprscan_db_record_count(const DsDb *db);
void deprscan_db_free(DsDb *db);

/* version may be NULL. */
DsStatus deprscan_extract_library(const char *root, const char *library, const char *version, DsDb **out);

/* Output strings are owned by the caller; release with deprscan_string_free. */
DsStatus deprscan_db_lookup_json(const DsDb *db, const char *fqn, char **out_json);
DsStatus deprscan_scan_source(const DsDb *db, const char *path, const char *source, char **out_json);
void deprscan_string_free(char *s);

#ifdef __cplusplus
}
#endif

#endif
