"""
Detecting PUCCH interference from PM counters
=============================================

Two counters, PUCCH decode-failure rate and UL degradation, separate a
jammed cell from a clean one. A 3-NN vote does the rest.
"""

# %%
from ltelab.detector import DetectionConfig, KnnModel, generate_samples, run_detection_experiment

samples = generate_samples(DetectionConfig())
for cat in samples.categories:
    rows = samples.features[[label == cat for label in samples.labels]]
    print(cat, rows.mean(axis=0).round(3), rows.std(axis=0).round(3))

# %% train/hold-out run with one interference point pulled toward the clean cluster
report = run_detection_experiment()
print(report.confusion, report.accuracy)
print("displaced point", report.test_features[report.displaced_index],
      "->", report.predictions[report.displaced_index])

# %% when measurement noise swamps the counters the vote is a coin flip
for sd in (0.05, 0.5, 5.0, 100.0):
    accs = [run_detection_experiment(DetectionConfig(noise_sd=sd, seed=s)).accuracy for s in range(20)]
    print(f"noise sd {sd:6.2f}: mean accuracy {sum(accs) / len(accs):.2f}")

# %% a direct query
model = KnnModel.fit(samples, k=3, normalize=True)
print(model.classify([0.8, 0.6]), model.classify([0.0, 0.0]))
