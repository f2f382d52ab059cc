import init, { rank1_gap, deflation_curves, ce_refinement } from "./pkg/cpdeflate_wasm.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function frame(canvas) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.font = "12px sans-serif";
  return { ctx, w: canvas.width, h: canvas.height, pad: 48 };
}

function axes({ ctx, w, h, pad }, xLabel, yLabel) {
  ctx.strokeStyle = "#888";
  ctx.beginPath();
  ctx.moveTo(pad, pad / 2);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - pad / 2, h - pad);
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.fillText(xLabel, w / 2, h - 10);
  ctx.save();
  ctx.translate(12, h / 2);
  ctx.rotate(-Math.PI / 2);
  ctx.fillText(yLabel, 0, 0);
  ctx.restore();
}

function histogram(canvas, values, bins = 30) {
  const f = frame(canvas);
  const lo = Math.min(0, ...values);
  const hi = Math.max(...values);
  const width = (hi - lo) / bins || 1;
  const counts = new Array(bins).fill(0);
  for (const v of values) counts[Math.min(bins - 1, Math.floor((v - lo) / width))]++;
  const top = Math.max(...counts);
  const plotW = f.w - 1.5 * f.pad;
  const plotH = f.h - 1.5 * f.pad;
  f.ctx.fillStyle = COLORS[0];
  counts.forEach((c, i) => {
    const bh = (c / top) * plotH;
    f.ctx.fillRect(f.pad + (i * plotW) / bins, f.h - f.pad - bh, plotW / bins - 1, bh);
  });
  axes(f, `gap, from ${lo.toExponential(2)} to ${hi.toExponential(2)}`, "count");
}

// Log-scale line plot of several series.
function lines(canvas, series, xLabel, yLabel) {
  const f = frame(canvas);
  const all = series.flatMap((s) => s.values).filter((v) => v > 0);
  const lo = Math.log10(Math.min(...all));
  const hi = Math.log10(Math.max(...all));
  const span = hi - lo || 1;
  const n = Math.max(...series.map((s) => s.values.length)) - 1 || 1;
  const x = (i) => f.pad + (i / n) * (f.w - 1.5 * f.pad);
  const y = (v) => f.h - f.pad - ((Math.log10(Math.max(v, 10 ** lo)) - lo) / span) * (f.h - 1.5 * f.pad);
  series.forEach((s, k) => {
    f.ctx.strokeStyle = COLORS[k % COLORS.length];
    f.ctx.beginPath();
    s.values.forEach((v, i) => (i ? f.ctx.lineTo(x(i), y(v)) : f.ctx.moveTo(x(i), y(v))));
    f.ctx.stroke();
    f.ctx.fillStyle = f.ctx.strokeStyle;
    f.ctx.fillText(s.name, f.w - 150, 20 + 16 * k);
  });
  f.ctx.fillStyle = "#444";
  f.ctx.fillText(`1e${hi.toFixed(1)}`, 4, f.pad / 2 + 4);
  f.ctx.fillText(`1e${lo.toFixed(1)}`, 4, f.h - f.pad);
  axes(f, xLabel, yLabel);
}

function guarded(outId, body) {
  return () => {
    const out = $(outId);
    out.classList.remove("err");
    try {
      out.textContent = body();
    } catch (e) {
      out.classList.add("err");
      out.textContent = String(e.message ?? e);
    }
  };
}

const runGap = guarded("gap-out", () => {
  const r = JSON.parse(rank1_gap($("gap-shape").value, num("gap-trials"), $("gap-complex").checked, num("gap-seed")));
  histogram($("gap-plot"), r.gaps);
  const min = Math.min(...r.gaps);
  const mean = r.gaps.reduce((a, b) => a + b, 0) / r.gaps.length;
  return `${r.gaps.length} tensors of shape ${r.shape.join("x")}: min ${min.toExponential(3)}, mean ${mean.toExponential(3)}, negative ${r.negative}`;
});

const runCurves = guarded("cur-out", () => {
  const r = JSON.parse(deflation_curves(num("cur-n"), num("cur-rank"), num("cur-snr"), num("cur-iter"), num("cur-seed")));
  lines($("cur-plot"), r.curves.map((c) => ({ name: c.algorithm, values: c.residuals })), "iteration", "|E|");
  return r.curves.map((c) => `${c.algorithm.padEnd(12)} final ${c.residuals.at(-1).toExponential(4)}`).join("\n");
});

const runCe = guarded("ce-out", () => {
  const r = JSON.parse(ce_refinement($("ce-shape").value, $("ce-complex").checked, num("ce-iter"), num("ce-seed")));
  const h = r.lambda_history;
  const top = h.at(-1);
  const gap = h.map((v) => Math.max(top - v, 1e-16));
  lines($("ce-plot"), [{ name: "final - objective", values: gap }], "half-step", "gap to final objective");
  return [
    `THOSVD residual ${r.thosvd_residual.toFixed(6)}`,
    `SeROAP residual ${r.seroap_residual.toFixed(6)}`,
    `CE residual     ${r.ce_residual.toFixed(6)} after ${r.iterations} iterations${r.converged ? "" : " (not converged)"}`,
  ].join("\n");
});

await init();
$("status").textContent = "Ready.";
$("gap-run").onclick = runGap;
$("cur-run").onclick = runCurves;
$("ce-run").onclick = runCe;
runGap();
runCurves();
runCe();
