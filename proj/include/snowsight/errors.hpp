#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace snowsight {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// sparse model ingestion --------------------------------------------------

class MissingFileError : public Error {
public:
    explicit MissingFileError(const std::string& name)
        : Error("missing file: " + name), name(name) {}
    std::string name;
};

class MalformedLineError : public Error {
public:
    MalformedLineError(const std::string& file, std::size_t line, const std::string& reason)
        : Error(file + ":" + std::to_string(line) + ": " + reason),
          file(file), line(line), reason(reason) {}
    std::string file;
    std::size_t line;
    std::string reason;
};

class DanglingReferenceError : public Error {
public:
    DanglingReferenceError(const std::string& kind, std::uint64_t id)
        : Error("dangling " + kind + " reference: " + std::to_string(id)),
          kind(kind), id(id) {}
    std::string kind;
    std::uint64_t id;
};

class UnsupportedCameraModelError : public Error {
public:
    explicit UnsupportedCameraModelError(const std::string& model)
        : Error("unsupported camera model: " + model), model(model) {}
    std::string model;
};

class EmptyModelError : public Error {
public:
    using Error::Error;
};

class UnknownImageError : public Error {
public:
    explicit UnknownImageError(std::uint64_t id)
        : Error("unknown image id: " + std::to_string(id)), id(id) {}
    std::uint64_t id;
};

// geometry -----------------------------------------------------------------

class NonUnitQuaternionError : public Error {
public:
    explicit NonUnitQuaternionError(double norm)
        : Error("quaternion norm " + std::to_string(norm) + " too far from 1") {}
};

class DegenerateInputError : public Error {
public:
    using Error::Error;
};

class InsufficientPointsError : public Error {
public:
    using Error::Error;
};

class InsufficientCorrespondencesError : public Error {
public:
    using Error::Error;
};

class DegenerateConfigurationError : public Error {
public:
    using Error::Error;
};

class PointAtInfinityError : public Error {
public:
    using Error::Error;
};

// label rasters --------------------------------------------------------------

class MalformedPgmError : public Error {
public:
    using Error::Error;
};

class IllegalLabelValueError : public Error {
public:
    IllegalLabelValueError(int value, std::size_t index)
        : Error("illegal label value " + std::to_string(value) +
                " at index " + std::to_string(index)),
          value(value), index(index) {}
    int value;
    std::size_t index;
};

class EmptySubjectError : public Error {
public:
    using Error::Error;
};

class DimensionMismatchError : public Error {
public:
    using Error::Error;
};

// sidewalk model --------------------------------------------------------------

class NoCorrespondencesError : public Error {
public:
    using Error::Error;
};

class PlaneFitFailedError : public Error {
public:
    using Error::Error;
};

class ModelEmptyError : public Error {
public:
    using Error::Error;
};

class VersionMismatchError : public Error {
public:
    using Error::Error;
};

class ChecksumMismatchError : public Error {
public:
    using Error::Error;
};

class MalformedModelFileError : public Error {
public:
    using Error::Error;
};

// classification ---------------------------------------------------------------

class EmptyProjectionError : public Error {
public:
    using Error::Error;
};

// evaluation --------------------------------------------------------------------

class UnknownSceneError : public Error {
public:
    explicit UnknownSceneError(const std::string& query)
        : Error("no scene matches query: " + query), query(query) {}
    std::string query;
};

// manifests, synthetic scenes, CLI ------------------------------------------------

class ManifestError : public Error {
public:
    using Error::Error;
};

class UnregisteredQueryError : public Error {
public:
    explicit UnregisteredQueryError(const std::string& name)
        : Error("query not registered: " + name), name(name) {}
    std::string name;
};

class InvalidSpecError : public Error {
public:
    using Error::Error;
};

class UnknownQueryError : public Error {
public:
    explicit UnknownQueryError(const std::string& name)
        : Error("unknown query: " + name), name(name) {}
    std::string name;
};

class NoLabeledQueriesError : public Error {
public:
    using Error::Error;
};

class InvalidInputError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace snowsight
