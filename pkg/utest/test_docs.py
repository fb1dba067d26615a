import StochasticVlasov


def test_all_keywords_have_docs(tmp_path):
    library = StochasticVlasov.StochasticVlasov(output_dir=str(tmp_path))
    for name in library.get_keyword_names():
        assert (
            len(library.get_keyword_documentation(name)) > 1
        ), f"Keyword '{name}' is missing docs"


def test_intro_placeholders_are_filled(tmp_path):
    library = StochasticVlasov.StochasticVlasov(output_dir=str(tmp_path))
    intro = library.get_keyword_documentation("__intro__")
    assert "%ASSERTION_TABLE%" not in intro
    assert "%NOISE_VARIANTS%" not in intro
