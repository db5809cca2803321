#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace naminglab {

// Base for every domain error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed document: wrong types, missing keys, unparsable JSON.
class SchemaError : public Error {
public:
    using Error::Error;
};

// Document parses but breaks an invariant. Carries every violation found.
class ConsistencyError : public Error {
public:
    explicit ConsistencyError(std::vector<std::string> violations)
        : Error(join(violations)), violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out;
        for (const auto& s : v) {
            if (!out.empty()) out += "; ";
            out += s;
        }
        return out;
    }

    std::vector<std::string> violations_;
};

#define NAMINGLAB_DEFINE_ERROR(Name)        \
    class Name : public Error {             \
    public:                                 \
        using Error::Error;                 \
    };

NAMINGLAB_DEFINE_ERROR(NoPositiveEvidence)
NAMINGLAB_DEFINE_ERROR(UnknownClass)
NAMINGLAB_DEFINE_ERROR(MismatchedKeys)
NAMINGLAB_DEFINE_ERROR(EmptySignificantSet)
NAMINGLAB_DEFINE_ERROR(DuplicateAnnotator)
NAMINGLAB_DEFINE_ERROR(EmptyNaming)
NAMINGLAB_DEFINE_ERROR(BothEmpty)
NAMINGLAB_DEFINE_ERROR(UnsupportedD)
NAMINGLAB_DEFINE_ERROR(NoCommonActivations)
NAMINGLAB_DEFINE_ERROR(EmptyAfterNormalization)
NAMINGLAB_DEFINE_ERROR(ZeroTotalWeight)
NAMINGLAB_DEFINE_ERROR(InfeasibleConfig)
NAMINGLAB_DEFINE_ERROR(LexiconError)

#undef NAMINGLAB_DEFINE_ERROR

} // namespace naminglab
