from fedshift.model.params import LayeredParams
from fedshift.quantization.codec import dequantize_model, quantize_params


def fold_error_feedback(w: LayeredParams, residual: LayeredParams, bits: int, scheme: str, **codec_options):
    """
    Quantize w plus the carried residual and return the new residual

    v = w + residual, payload = Q(v), residual' = v - DeQ(Q(v))

    :return: (QuantizedModel, LayeredParams)
    """
    v = w.zip_map(residual, lambda a, b: a + b)
    payload = quantize_params(v, bits, scheme, **codec_options)
    new_residual = v.zip_map(dequantize_model(payload), lambda a, b: a - b)
    return payload, new_residual
