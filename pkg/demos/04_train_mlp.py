"""Train a small MLP decoder for C6e on the synchronized PLC channel and compare it with MD."""

import tempfile
from pathlib import Path

from permdecode.codes import CodeFamily, enumerate_code
from permdecode.harness import MdDecoder, MlpDecoder, TrainConfig, evaluate_bler, plc_sync_grid, train
from permdecode.neural import MlpSpec, load_model, param_count, save_model

cb = enumerate_code(CodeFamily("tenengolts_even", 6))
spec = MlpSpec.plc(6, c_max=6, hidden=128)
print("trainable parameters:", param_count(spec))

cfg = TrainConfig(delta=600, noise_grid=plc_sync_grid(6), max_epochs=5, seed=3)
weights, trace = train(spec, cb, cfg)
for epoch, (l, v) in enumerate(zip(trace.losses, trace.val_bler), 1):
    print(f"epoch {epoch}: loss {l:.4f}  validation BLER {v:.4f}")
print("kept epoch", trace.best_epoch)

path = Path(tempfile.mkdtemp()) / "c6e.pmnd"
save_model(weights, path)
_, weights = load_model(path)

for params in plc_sync_grid(6)[::3]:
    mlp = evaluate_bler(MlpDecoder(weights), cb, params, 20_000, seed=1)
    md = evaluate_bler(MdDecoder(cb, erasure=False), cb, params, 20_000, seed=1)
    print(f"p_bg={params.p_bg:.3f}  mlp {mlp.bler:.2e}  md {md.bler:.2e}")
