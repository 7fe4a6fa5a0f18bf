use super::MultipleAlignment;
use crate::bits::Bits;
use crate::model::Store;

/// Text layout of an alignment: row 0 on top, one line per row with the row
/// index at both ends, and `|` between rows wherever a column links them.
pub fn render<S: Bits>(al: &MultipleAlignment<S>, store: &Store) -> String {
    let nrows = al.rows.len();
    let mut grid: Vec<Vec<&str>> = vec![vec![""; al.columns.len()]; nrows];
    let mut widths = vec![0usize; al.columns.len()];
    for (c, col) in al.columns.iter().enumerate() {
        for &cell in col {
            let name = store.alphabet.name(al.symbol(store, cell).0);
            grid[cell.row][c] = name;
            widths[c] = widths[c].max(name.chars().count());
        }
    }
    let label = nrows.saturating_sub(1).to_string().len();
    let line = |cells: Vec<String>, tag: String| {
        let body = cells.join(" ");
        format!("{tag:<label$} {body} {tag}").trim_end().to_string()
    };
    let mut out = Vec::new();
    for r in 0..nrows {
        if r > 0 {
            let bars: Vec<String> = (0..al.columns.len())
                .map(|c| {
                    let links = al.columns[c].iter().any(|x| x.row < r) && al.columns[c].iter().any(|x| x.row >= r);
                    let mark = if links { "|" } else { "" };
                    format!("{mark:<w$}", w = widths[c])
                })
                .collect();
            out.push(line(bars, " ".repeat(label)).trim_end().to_string());
        }
        let cells: Vec<String> = (0..al.columns.len()).map(|c| format!("{:<w$}", grid[r][c], w = widths[c])).collect();
        out.push(line(cells, r.to_string()));
    }
    let mut s = out.join("\n");
    s.push('\n');
    s
}
