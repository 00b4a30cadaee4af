#ifndef MARVIST_H
#define MARVIST_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MarvistStatus {
  MARVIST_STATUS_OK = 0,
  MARVIST_STATUS_NULL_ARGUMENT = 1,
  MARVIST_STATUS_INVALID_UTF8 = 2,
  // The engine rejected the call; see `marvist_engine_last_error`.
  MARVIST_STATUS_ENGINE_ERROR = 3,
  MARVIST_STATUS_PANIC = 4,
} MarvistStatus;

// Opaque engine handle.
typedef struct MarvistEngine MarvistEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates an engine whose relative paths resolve against `base_dir`
// (the process working directory when null). Returns null on failure.
//
// # Safety
// `base_dir` must be null or a valid NUL-terminated string.
struct MarvistEngine *marvist_engine_new(const char *base_dir);

// # Safety
// `handle` must come from `marvist_engine_new` and not be used afterwards.
void marvist_engine_free(struct MarvistEngine *handle);

// Executes one command line. On success `*out_json` holds the outcome
// (the JSON literal `null` for blank or comment lines).
//
// # Safety
// `handle` must be live, `line` a valid string and `out_json` writable.
enum MarvistStatus marvist_engine_execute(struct MarvistEngine *handle,
                                          const char *line,
                                          char **out_json);

// Writes the canonical scene document to `*out_json`.
//
// # Safety
// `handle` must be live and `out_json` writable.
enum MarvistStatus marvist_engine_scene_json(struct MarvistEngine *handle, char **out_json);

// Writes the canonical export document to `*out_json`.
//
// # Safety
// `handle` must be live and `out_json` writable.
enum MarvistStatus marvist_engine_export_json(struct MarvistEngine *handle, char **out_json);

// `{"code": ..., "message": ...}` for the last failed call, or null.
// Valid until the next call on the same handle.
//
// # Safety
// `handle` must be null or live.
const char *marvist_engine_last_error(const struct MarvistEngine *handle);

// # Safety
// `s` must be null or a string returned by this library, freed once.
void marvist_string_free(char *s);

const char *marvist_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MARVIST_H */
