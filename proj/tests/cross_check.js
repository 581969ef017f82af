// Solves each LP-format model file given on the command line with an
// independent MILP solver and prints one line per file:
//   <basename>\t<status>\t<objective>
// Exits nonzero if any file cannot be solved.

const fs = require('fs');
const path = require('path');

(async () => {
  const loadHighs = require('highs');
  const highs = await loadHighs();
  let failed = false;
  for (const file of process.argv.slice(2)) {
    try {
      const text = fs.readFileSync(file, 'utf8');
      const result = highs.solve(text, {
        mip_rel_gap: 0,
        mip_abs_gap: 0,
        primal_feasibility_tolerance: 1e-9,
      });
      console.log(
        `${path.basename(file)}\t${result.Status}\t${result.ObjectiveValue}`);
    } catch (err) {
      failed = true;
      console.log(`${path.basename(file)}\tERROR\t${err.message}`);
    }
  }
  process.exit(failed ? 1 : 0);
})();
