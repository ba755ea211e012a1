"""Measure forward-pass latency versus batch size.

Prints one row per batch size in {1, 2, 4, 8, 16} with total runtime and
throughput.  The numbers are hardware-specific and meant for reporting,
not comparison against any reference.

Run:  python3 demos/02_batch_latency.py
"""

import torch

from cdrsurrogate import ConditionedUNet, predict_batch

torch.manual_seed(0)
model = ConditionedUNet().eval()

# warm-up so lazy allocations do not pollute the first row
predict_batch(model, torch.randn(1, 1, 64, 64), torch.randn(1, 4))

print(f"{'batch':>6} {'runtime [ms]':>14} {'samples/s':>12}")
for batch in (1, 2, 4, 8, 16):
    x0 = torch.randn(batch, 1, 64, 64)
    c = torch.randn(batch, 4)
    # median of three runs keeps scheduler noise out of the table
    times = []
    for _ in range(3):
        _, seconds = predict_batch(model, x0, c)
        times.append(seconds)
    seconds = sorted(times)[1]
    print(f"{batch:>6} {seconds * 1e3:>14.2f} {batch / seconds:>12.1f}")
