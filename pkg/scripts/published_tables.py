"""Run the statistics pipeline over the published quantity, quartile and top-score tables."""

from importlib import resources

from qcompose.experiment import analyze_table, render_text


def main():
    data = resources.files("qcompose.data")
    with resources.as_file(data / "quantities_by_set.csv") as q:
        print("== quantities ==")
        print(render_text(analyze_table(q)))
    with resources.as_file(data / "top_scores_by_set.csv") as s, resources.as_file(data / "score_quartiles.csv") as qs:
        print("== outliers from printed quartiles ==")
        print(render_text(analyze_table(s, quartiles_path=qs)))


if __name__ == "__main__":
    main()
