'''Subcommands, one module each; registered on the entry group in semrate.cli'''
