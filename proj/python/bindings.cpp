#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "ylt/anchors.hpp"
#include "ylt/boxes.hpp"
#include "ylt/config.hpp"
#include "ylt/errors.hpp"
#include "ylt/eval.hpp"
#include "ylt/network.hpp"
#include "ylt/region.hpp"
#include "ylt/synth.hpp"
#include "ylt/weights.hpp"

namespace py = pybind11;
using namespace ylt;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

Tensor tensor_from_array(const FloatArray& arr) {
    std::vector<int> shape;
    for (py::ssize_t i = 0; i < arr.ndim(); ++i)
        shape.push_back(static_cast<int>(arr.shape(i)));
    Tensor t(shape);
    std::memcpy(t.data.data(), arr.data(), sizeof(float) * static_cast<std::size_t>(t.numel()));
    return t;
}

py::array_t<float> array_from_tensor(const Tensor& t) {
    std::vector<py::ssize_t> shape(t.shape.begin(), t.shape.end());
    py::array_t<float> arr(shape);
    std::memcpy(arr.mutable_data(), t.data.data(),
                sizeof(float) * static_cast<std::size_t>(t.numel()));
    return arr;
}

struct Quad {
    float cx, cy, w, h;
};

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "single-pass detector toolkit core";
    m.attr("__version__") = "0.1.0";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);

    py::class_<NetworkConfig>(m, "NetworkConfig")
        .def_readonly("input_width", &NetworkConfig::input_width)
        .def_readonly("input_height", &NetworkConfig::input_height)
        .def_property_readonly("num_classes",
                               [](const NetworkConfig& c) { return c.head.num_classes; })
        .def_property_readonly("anchors", [](const NetworkConfig& c) { return c.head.anchors; })
        .def_property_readonly("grid", [](const NetworkConfig& c) {
            return py::make_tuple(c.grid_w(), c.grid_h());
        })
        .def_property_readonly("total_stride", &NetworkConfig::total_stride)
        .def("__repr__", [](const NetworkConfig& c) {
            return "NetworkConfig(" + std::to_string(c.input_width) + "x" +
                   std::to_string(c.input_height) + ", classes=" +
                   std::to_string(c.head.num_classes) + ", anchors=" +
                   std::to_string(c.head.num_anchors()) + ")";
        });

    m.def("parse_config", &parse_network_config_text, py::arg("text"));
    m.def("load_config", &load_network_config, py::arg("path"));
    m.def("config_to_text", &network_config_to_text, py::arg("config"));

    py::class_<Detection>(m, "Detection")
        .def_readonly("class_id", &Detection::class_id)
        .def_readonly("cx", &Detection::cx)
        .def_readonly("cy", &Detection::cy)
        .def_readonly("w", &Detection::w)
        .def_readonly("h", &Detection::h)
        .def_readonly("probability", &Detection::probability)
        .def("__repr__", [](const Detection& d) {
            return "Detection(class=" + std::to_string(d.class_id) +
                   ", p=" + std::to_string(d.probability) + ")";
        });

    py::class_<Network>(m, "Network")
        .def(py::init<const NetworkConfig&, std::uint64_t>(), py::arg("config"),
             py::arg("seed") = 0)
        .def_property_readonly("config", &Network::config)
        .def("forward",
             [](Network& net, const FloatArray& input) {
                 Tensor t = tensor_from_array(input);
                 bool squeezed = false;
                 if (t.ndim() == 3) {
                     t.shape.insert(t.shape.begin(), 1);
                     squeezed = true;
                 }
                 Tensor out = net.forward(t, Mode::infer);
                 if (squeezed) out = slice_batch(out, 0);
                 return array_from_tensor(out);
             },
             py::arg("input"), "inference-mode forward pass on a [3,H,W] or [N,3,H,W] array")
        .def("detect",
             [](Network& net, const FloatArray& image, float threshold) {
                 Tensor t = tensor_from_array(image);
                 if (t.ndim() != 3)
                     throw ConfigError("detect expects one [3, H, W] image");
                 return forward_detect(net, t, net.config().head, threshold);
             },
             py::arg("image"), py::arg("threshold") = 0.25f,
             "resize, infer, decode, and apply NMS on one image");

    m.def("load_weights", &load_weights, py::arg("path"), py::arg("config"));
    m.def("save_weights", &save_weights, py::arg("net"), py::arg("path"));

    py::class_<AnchorEstimate>(m, "AnchorEstimate")
        .def_readonly("anchors", &AnchorEstimate::anchors)
        .def_readonly("duplicated", &AnchorEstimate::duplicated)
        .def_readonly("mean_distortion", &AnchorEstimate::mean_distortion);

    m.def("estimate_anchors", &estimate_anchors, py::arg("boxes"), py::arg("k"),
          py::arg("grid_size"), py::arg("seed") = 0);

    m.def(
        "iou",
        [](std::tuple<float, float, float, float> a, std::tuple<float, float, float, float> b) {
            Quad qa{std::get<0>(a), std::get<1>(a), std::get<2>(a), std::get<3>(a)};
            Quad qb{std::get<0>(b), std::get<1>(b), std::get<2>(b), std::get<3>(b)};
            return iou(qa, qb);
        },
        py::arg("a"), py::arg("b"), "IoU of two (cx, cy, w, h) boxes");

    m.def(
        "generate_scene",
        [](int num_classes, int boxes, int distractors, int size, std::uint64_t seed) {
            SyntheticSceneSpec spec;
            spec.width = spec.height = size;
            spec.num_classes = num_classes;
            spec.boxes = boxes;
            spec.distractors = distractors;
            spec.seed = seed;
            AnnotatedImage scene = generate_synthetic_scene(spec);
            py::list anns;
            for (const BoxAnnotation& b : scene.boxes)
                anns.append(py::make_tuple(b.class_id, b.cx, b.cy, b.w, b.h));
            return py::make_tuple(array_from_tensor(scene.pixels), anns);
        },
        py::arg("num_classes") = 3, py::arg("boxes") = 3, py::arg("distractors") = 0,
        py::arg("size") = 128, py::arg("seed") = 0,
        "render a synthetic scene; returns ([3,H,W] array, [(class, cx, cy, w, h), ...])");
}
