from semrate.cli import main

main(prog_name='semrate')
