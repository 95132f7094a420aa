"""Reproduce the qualitative finding on the synthetic compressor zoo.

Eight bounded-context compressors (orders 1-4, two smoothing levels)
are measured for sliding-window BPC on held-out text and for a
composite completion score.  A straight line in (bpc, log score) space
fits the cloud far better than a straight line in (bpc, score) space.
"""

from pathlib import Path

from codebpc import ObservationPoint, WindowConfig, compare_models, emit_plot_data
from codebpc.zoo import ZooSpec, build_zoo, evaluate_zoo, generate_corpus

seed = 7
train = generate_corpus(seed, documents=24, functions_per_doc=12, prefix="train")
validation = generate_corpus(seed + 1, documents=8, functions_per_doc=12, prefix="val")
bench_code = generate_corpus(seed + 2, documents=6, functions_per_doc=12, prefix="bench")
bench_text = generate_corpus(seed + 3, documents=6, functions_per_doc=12,
                             prefix="benchtext", style="comments")

models = build_zoo(train, ZooSpec(orders=(1, 2, 3, 4), alphas=(1.0, 0.05)))
outcomes = evaluate_zoo(models, validation, bench_code, bench_text, WindowConfig(16, 4), seed)

print(f"{'model':20s} {'bpc':>8s} {'score':>8s}")
for o in outcomes:
    print(f"{o.model_name:20s} {o.bpc:8.4f} {o.score:8.4f}")

points = [ObservationPoint(o.model_name, o.bpc, o.score) for o in outcomes]
comparison = compare_models(points)
print(f"\nwinner: {comparison.winner}")
for report in comparison.reports:
    print(
        f"  {report.model_form:11s} pearson={report.pearson_r:+.4f} "
        f"rmse(score space)={report.rmse_backtransformed:.4f}"
    )

out_dir = Path(__file__).parent / "out"
paths = emit_plot_data(comparison.reports, points, out_dir)
print(f"\nwrote {paths['svg']} and {paths['csv']}")
