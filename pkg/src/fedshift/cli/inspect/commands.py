import click

from fedshift.metrics.histogram import weight_histogram
from fedshift.quantization.codec import dequantize_model
from fedshift.quantization.payload import aux_length, packed_length, payload_size, read_payload


@click.command(name='inspect-payload', short_help='Describe a .fsq payload')
@click.argument('path', type=click.Path(dir_okay=False))
@click.option('--bins', type=click.IntRange(min=2), default=10, show_default=True, help='Histogram bins per layer')
def inspect_payload(path, bins):
    """Print a payload's header, per-layer sizes and a histogram of its dequantized weights"""
    q = read_payload(path)
    weight_bytes, aux_bytes = payload_size(q)
    click.echo(f'scheme={q.scheme} bits={q.bits} layers={len(q.layers)} params={q.num_params} '
               f'weight_bytes={weight_bytes} aux_bytes={aux_bytes}')
    histograms = weight_histogram(dequantize_model(q), bins)
    for layer in q.layers:
        click.echo(f'{layer.name}: count={layer.size} weight_bytes={packed_length(layer.size, q.bits)} '
                   f'aux_bytes={aux_length(q.scheme, q.bits)}')
        edges, counts = histograms[layer.name]
        for lo, hi, count in zip(edges[:-1], edges[1:], counts):
            click.echo(f'  [{lo:+.6g}, {hi:+.6g}) {count}')
