#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace moham
{

    enum class LayerKind { Conv, Depthwise, FullyConnected };

    std::string ToString(LayerKind kind);
    LayerKind LayerKindFromString(const std::string& text);

    // Loop dimensions of a layer. The numeric value is the position in
    // LayerShape::Dims() and in every per-dimension array of a mapping.
    enum class Dim : std::size_t { C = 0, K, Y, X, R, S };

    inline constexpr std::size_t kNumDims = 6;
    inline constexpr std::array<Dim, kNumDims> kAllDims = {Dim::C, Dim::K, Dim::Y, Dim::X, Dim::R, Dim::S};

    char DimLetter(Dim d);
    Dim DimFromLetter(char letter);

    template <typename T>
    using PerDim = std::array<T, kNumDims>;

    struct LayerShape
    {
        std::int64_t c = 1;
        std::int64_t k = 1;
        std::int64_t y = 1;
        std::int64_t x = 1;
        std::int64_t r = 1;
        std::int64_t s = 1;
        LayerKind kind = LayerKind::Conv;

        PerDim<std::int64_t> Dims() const { return {c, k, y, x, r, s}; }
        std::int64_t Extent(Dim d) const { return Dims()[static_cast<std::size_t>(d)]; }
        std::int64_t TotalMacs() const { return c * k * y * x * r * s; }

        // Canonical text key, e.g. "CONV:c64k64y56x56r3s3". Used to key catalogs and cost tables.
        std::string Key() const;

        // Throws ValidationError when a dimension is < 1 or an FC layer has r,s != 1.
        void Validate() const;

        friend bool operator==(const LayerShape&, const LayerShape&) = default;
        friend auto operator<=>(const LayerShape&, const LayerShape&) = default;
    };

    // Dense index of a layer within the application model, assigned in file order.
    using LayerId = std::size_t;

    struct Layer
    {
        LayerId id = 0;
        std::size_t model = 0;
        LayerShape shape;
        std::string name;
    };

    struct DnnModel
    {
        std::string id;
        std::vector<LayerId> layers;
        std::vector<std::pair<LayerId, LayerId>> deps;
    };

    class ApplicationModel
    {
    public:
        ApplicationModel() = default;

        // Validates and freezes the model. Throws ValidationError on duplicate
        // ids, dangling or cross-model dependencies, or cycles.
        ApplicationModel(std::vector<DnnModel> models, std::vector<Layer> layers);

        const std::vector<DnnModel>& Models() const { return models_; }
        const std::vector<Layer>& Layers() const { return layers_; }
        const Layer& GetLayer(LayerId id) const { return layers_.at(id); }
        std::size_t NumLayers() const { return layers_.size(); }
        std::size_t NumDeps() const;

        const std::vector<LayerId>& Predecessors(LayerId id) const { return preds_.at(id); }
        const std::vector<LayerId>& Successors(LayerId id) const { return succs_.at(id); }

        std::optional<LayerId> FindLayer(const std::string& name) const;

    private:
        std::vector<DnnModel> models_;
        std::vector<Layer> layers_;
        std::vector<std::vector<LayerId>> preds_;
        std::vector<std::vector<LayerId>> succs_;
    };

    ApplicationModel ParseApplicationModel(const nlohmann::json& document);
    ApplicationModel LoadApplicationModel(const std::string& path);
    nlohmann::json ToJson(const ApplicationModel& am);

    enum class TieBreak { Deterministic, SeededRandom };

    // Kahn's algorithm. Deterministic mode picks the lowest ready layer id;
    // seeded-random mode picks uniformly among ready layers using `rng`.
    std::vector<LayerId> KahnToposort(const ApplicationModel& am, TieBreak tie_break, std::mt19937_64* rng = nullptr);

    bool IsTopologicalOrder(const ApplicationModel& am, const std::vector<LayerId>& order);

    struct UniqueLayerClass
    {
        LayerShape shape;
        std::vector<LayerId> members;
    };

    // Classes are ordered by the first appearance of their shape in the model.
    std::vector<UniqueLayerClass> UniqueLayers(const ApplicationModel& am);

} // namespace moham
