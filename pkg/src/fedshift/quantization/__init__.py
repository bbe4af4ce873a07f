from .codec import dequantize_layer, dequantize_model, quantize_layer, quantize_params
from .kmeans import dequant_kmeans, kmeans_fit, nearest_centroid, quant_kmeans
from .payload import (deserialize_payload, full_precision_size, overhead_size, payload_size, read_payload,
                      serialize_payload, transfer_efficiency, write_payload)
from .types import (FULL_PRECISION_BITS, SCHEME_KMEANS, SCHEME_RAW, SCHEME_UNIFORM, SCHEMES, KMeansCodebook,
                    QuantizedLayer, QuantizedModel, UniformCodec)
from .uniform import dequant_uniform, half_step, quant_uniform
