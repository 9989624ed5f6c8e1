#include "idsynth/idsynth.h"

#include <stdexcept>
#include <string>

namespace {

thread_local std::string g_last_error;

ids_status fail(ids_status code, const std::string& msg) {
    g_last_error = msg;
    return code;
}

template <typename Fn>
ids_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return IDS_OK;
    } catch (const std::invalid_argument& e) {
        return fail(IDS_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::runtime_error& e) {
        return fail(IDS_ERR_BAD_INPUT, e.what());
    } catch (const std::exception& e) {
        return fail(IDS_ERR_INTERNAL, e.what());
    }
}

}  // namespace

extern "C" {

const char* ids_version(void) { return "0.1.0"; }

const char* ids_last_error(void) { return g_last_error.c_str(); }

}  // extern "C"
