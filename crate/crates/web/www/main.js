import init, { baseline_names, flops_report, anchor_stats_demo, bootstrap_demo } from "./pkg/redist_web.js";

const $ = (id) => document.getElementById(id);

function show(target, fn) {
  try {
    target.innerHTML = fn();
  } catch (e) {
    target.innerHTML = `<p class="error">${e.message ?? e}</p>`;
  }
}

function fmt(x, digits = 3) {
  return Number(x).toFixed(digits);
}

function flops() {
  const custom = $("arch-json").value.trim();
  const r = JSON.parse(flops_report(custom || $("arch-name").value, $("arch-input").value));
  const rows = r.rows
    .map((row) => `<tr><td>${row.component}</td><td>${fmt(row.macs / 1e9, 4)}</td><td>${fmt(row.params / 1e6, 4)}</td><td>${fmt(row.ratio * 100, 1)}%</td></tr>`)
    .join("");
  return `<p>${r.id}: ${fmt(r.gmacs)} GMACs, ${fmt(r.mparams)} M params; shallow ${fmt(r.shallow * 100, 1)}% / deep ${fmt(r.deep * 100, 1)}% of backbone</p>
    <table><tr><th>component</th><th>GMACs</th><th>params (M)</th><th>share</th></tr>${rows}</table>
    <div class="plot">${r.svg}</div>`;
}

function anchors() {
  const r = JSON.parse(anchor_stats_demo(Number($("anchor-images").value), BigInt($("anchor-seed").value)));
  const ratio = r.baseline[0] > 0 ? fmt(r.sr[0] / r.baseline[0], 2) : "n/a";
  return `<p>Anchor 16 positives: ${r.baseline[0]} with the baseline range, ${r.sr[0]} with the enlarged range (ratio ${ratio}).</p>
    <div class="plot">${r.svg}</div>`;
}

function bootstrap() {
  const r = JSON.parse(
    bootstrap_demo(
      $("boot-component").value,
      Number($("boot-count").value),
      BigInt($("boot-seed").value),
      Number($("boot-noise").value),
    ),
  );
  return `<p>${r.component}: [${fmt(r.range.low)}, ${fmt(r.range.high)}] at ${r.range.confidence} confidence, B = ${r.range.replicates}${r.range.degenerate ? " (degenerate)" : ""}.
    Best ${r.best.id}, score ${fmt(r.best.score)}, ${fmt(r.best.gmacs)} GMACs.</p>
    <div class="plot">${r.svg}</div>`;
}

await init();
for (const name of JSON.parse(baseline_names())) {
  $("arch-name").add(new Option(name, name));
}
$("arch-run").onclick = () => show($("arch-out"), flops);
$("anchor-run").onclick = () => show($("anchor-out"), anchors);
$("boot-run").onclick = () => show($("boot-out"), bootstrap);
show($("arch-out"), flops);
