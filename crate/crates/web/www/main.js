import init, { topk_formula, counts_curve, predict_periodicity } from "./pkg/denumerant_web.js";

const $ = (id) => document.getElementById(id);

function show(id, fn) {
  const el = $(id);
  el.classList.remove("err");
  try {
    el.textContent = fn();
  } catch (e) {
    el.classList.add("err");
    el.textContent = String(e);
  }
}

function formula() {
  const r = JSON.parse(topk_formula($("entries").value, Number($("k").value)));
  const lines = [`N = ${r.n}, k = ${r.k}, coefficients periodic with period dividing ${r.period_bound}`];
  if (r.gcd !== "1") lines.push(`entries share ${r.gcd}: formula in t/${r.gcd}, zero off multiples`);
  lines.push("", r.formula, "");
  for (const d of r.degrees) lines.push(`E_${d.degree}(t) = ${d.coefficient}    (${d.terms} terms)`);
  return lines.join("\n");
}

function plot(exact, approx) {
  const c = $("plot");
  const g = c.getContext("2d");
  const pad = 40;
  const w = c.width - 2 * pad;
  const h = c.height - 2 * pad;
  const finite = exact.concat(approx).filter(Number.isFinite);
  const lo = Math.min(0, ...finite);
  const hi = Math.max(1, ...finite);
  const x = (t) => pad + (t / Math.max(1, exact.length - 1)) * w;
  const y = (v) => pad + h - ((v - lo) / (hi - lo)) * h;
  g.clearRect(0, 0, c.width, c.height);
  g.strokeStyle = "#999";
  g.strokeRect(pad, pad, w, h);
  g.fillStyle = "#444";
  g.fillText(String(hi.toPrecision(4)), 2, pad + 4);
  g.fillText(String(lo), 2, pad + h);
  g.fillText(String(exact.length - 1), pad + w - 20, pad + h + 16);
  g.strokeStyle = "#d62728";
  g.beginPath();
  approx.forEach((v, t) => (t ? g.lineTo(x(t), y(v)) : g.moveTo(x(t), y(v))));
  g.stroke();
  g.fillStyle = "#1f77b4";
  const step = Math.max(1, Math.floor(exact.length / 400));
  for (let t = 0; t < exact.length; t += step) g.fillRect(x(t) - 1.5, y(exact[t]) - 1.5, 3, 3);
}

function curve() {
  const r = JSON.parse(counts_curve($("entries").value, Number($("k").value), Number($("tmax").value)));
  plot(r.exact, r.approx);
  let worst = 0;
  r.exact.forEach((v, t) => (worst = Math.max(worst, Math.abs(v - r.approx[t]))));
  return `k = ${r.k}; largest |count - formula| on the range: ${worst.toPrecision(6)}`;
}

function predict() {
  const r = JSON.parse(predict_periodicity($("entries").value));
  const lines = [
    `factorizations: ${r.factorizations.join(", ")}`,
    `largest sublist with a common prime: ${r.ell} entries`,
    `first non-constant coefficient: E_${r.first_nonconstant_degree}`,
    `maximal sublists (1-based positions): ${r.sublists.map((s) => "{" + s.join(",") + "}").join(" ")}`,
    `spectrum and Möbius values: ${r.spectrum.map((s) => `μ(${s.f}) = ${s.mu}`).join(", ")}`,
    `predicted period of that coefficient: ${r.period}`,
    `leading coefficient: ${r.leading}`,
  ];
  return lines.join("\n");
}

await init();
$("run-formula").onclick = () => show("formula", formula);
$("run-curve").onclick = () => show("curve-info", curve);
$("run-predict").onclick = () => show("predict", predict);
show("formula", formula);
