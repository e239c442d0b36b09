// Minimal single-header unit-test framework with Catch2-compatible macros.
// Vendored into the generated tree so the emitted tests have no external
// dependency. Test cases run in registration order, which equals their
// textual order within a translation unit.
#ifndef TSL_TEST_HPP
#define TSL_TEST_HPP

#include <cstdio>
#include <exception>
#include <vector>

namespace tsl_test {

struct test_case {
    const char* name;
    const char* tags;
    void (*fn)();
};

inline std::vector<test_case>& registry() {
    static std::vector<test_case> cases;
    return cases;
}

struct registrar {
    registrar(const char* name, const char* tags, void (*fn)()) {
        registry().push_back(test_case{name, tags, fn});
    }
};

struct assertion_failed : std::exception {
    const char* what() const noexcept override { return "assertion failed"; }
};

inline void require(bool ok, const char* expression, const char* file, int line) {
    if (!ok) {
        std::fprintf(stderr, "FAILED: REQUIRE(%s) at %s:%d\n", expression, file, line);
        throw assertion_failed{};
    }
}

inline int run_all() {
    int failed = 0;
    for (const test_case& tc : registry()) {
        try {
            tc.fn();
            std::printf("PASS %s\n", tc.name);
        } catch (const assertion_failed&) {
            std::printf("FAIL %s\n", tc.name);
            ++failed;
        } catch (const std::exception& e) {
            std::printf("FAIL %s (unexpected exception: %s)\n", tc.name, e.what());
            ++failed;
        }
    }
    std::printf("%zu test cases, %d failures\n", registry().size(), failed);
    return failed == 0 ? 0 : 1;
}

} // namespace tsl_test

#define TSL_TEST_CONCAT_IMPL(a, b) a##b
#define TSL_TEST_CONCAT(a, b) TSL_TEST_CONCAT_IMPL(a, b)

#define TEST_CASE(name, tags)                                                            \
    static void TSL_TEST_CONCAT(tsl_test_fn_, __LINE__)();                               \
    static ::tsl_test::registrar TSL_TEST_CONCAT(tsl_test_reg_, __LINE__)(               \
        name, tags, &TSL_TEST_CONCAT(tsl_test_fn_, __LINE__));                           \
    static void TSL_TEST_CONCAT(tsl_test_fn_, __LINE__)()

#define REQUIRE(expression) \
    ::tsl_test::require(static_cast<bool>(expression), #expression, __FILE__, __LINE__)

#define REQUIRE_FALSE(expression) \
    ::tsl_test::require(!static_cast<bool>(expression), "!(" #expression ")", __FILE__, __LINE__)

#define TSL_TEST_WARN_UNSAFE(message) \
    std::fprintf(stderr, "[UNSAFE TEST WARNING] %s\n", message)

#ifdef TSL_TEST_MAIN
int main() { return ::tsl_test::run_all(); }
#endif

#endif // TSL_TEST_HPP
